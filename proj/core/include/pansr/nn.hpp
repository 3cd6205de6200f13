#pragma once

#include "pansr/nn/architecture.hpp"
#include "pansr/nn/checkpoint.hpp"
#include "pansr/nn/gradcheck.hpp"
#include "pansr/nn/inference.hpp"
#include "pansr/nn/layers.hpp"
#include "pansr/nn/model.hpp"
#include "pansr/nn/tensor.hpp"
#include "pansr/nn/train.hpp"
