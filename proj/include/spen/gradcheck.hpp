#pragma once

#include <functional>

#include "spen/core.hpp"

namespace spen::gradcheck {

/// Central-difference gradient of a scalar objective, probing every pixel:
/// (f(x + step e) - f(x - step e)) / (2 step). Throws NonFiniteData when an
/// evaluation returns NaN or infinity.
ImageGrid finite_diff_grad(const std::function<double(const ImageGrid&)>& f, const ImageGrid& x,
                           double step = 1e-3);

struct GradCompareReport {
    bool pass = true;
    /// |analytic - numeric| at the worst pixel, worst by err / tolerance.
    double worst_abs_err = 0.0;
    /// err / tolerance at that pixel (<= 1 everywhere iff pass).
    double worst_ratio = 0.0;
    int worst_row = 0;
    int worst_col = 0;
    int worst_channel = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

/// Per-pixel comparison: pass iff
/// |a - n| <= max(abs_floor, rel_tol * max(|a|, |n|)) at every pixel.
GradCompareReport compare_grads(const ImageGrid& analytic, const ImageGrid& numeric,
                                double rel_tol = 1e-4, double abs_floor = 1e-8);

}  // namespace spen::gradcheck
