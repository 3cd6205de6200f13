#pragma once

#include "pansr/metrics/canny.hpp"
#include "pansr/metrics/entropy.hpp"
#include "pansr/metrics/filters.hpp"
#include "pansr/metrics/fsim.hpp"
#include "pansr/metrics/issm.hpp"
#include "pansr/metrics/phase_congruency.hpp"
#include "pansr/metrics/psnr.hpp"
#include "pansr/metrics/report.hpp"
#include "pansr/metrics/ssim.hpp"
