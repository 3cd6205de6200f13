#pragma once

#include "pansr/raster.hpp"

namespace pansr::metrics {

/// Shannon entropy in bits of a band already scaled to [0, 255], over a
/// 256-bin histogram.
double shannon_entropy(const Plane& band);

/// Entropy-histogram similarity: -sum(H * log2 H) over the joint count
/// histogram of (x, y) with `bins` x `bins` equal-width bins spanning each
/// band's own [min, max] (widened by 0.5 on both sides when constant). Empty
/// bins contribute 0. Counts are not normalized.
double entropy_histogram_similarity(const Plane& x, const Plane& y, int bins = 10);

}  // namespace pansr::metrics
