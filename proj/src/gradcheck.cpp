#include "spen/gradcheck.hpp"

#include <cmath>

namespace spen::gradcheck {

ImageGrid finite_diff_grad(const std::function<double(const ImageGrid&)>& f, const ImageGrid& x,
                           double step) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidRange("finite-difference step must be positive and finite");
    }
    std::vector<double> probe = x.data();
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double original = probe[i];
        probe[i] = original + step;
        const double plus = f(x.with_data(probe));
        probe[i] = original - step;
        const double minus = f(x.with_data(probe));
        probe[i] = original;
        if (!std::isfinite(plus) || !std::isfinite(minus)) {
            throw NonFiniteData("objective returned a non-finite value during probing");
        }
        grad[i] = (plus - minus) / (2.0 * step);
    }
    return x.with_data(std::move(grad));
}

GradCompareReport compare_grads(const ImageGrid& analytic, const ImageGrid& numeric,
                                double rel_tol, double abs_floor) {
    validate_pair(analytic, numeric);
    GradCompareReport report;
    for (int r = 0; r < analytic.height(); ++r) {
        for (int c = 0; c < analytic.width(); ++c) {
            for (int k = 0; k < analytic.channels(); ++k) {
                const double a = analytic.at(r, c, k);
                const double n = numeric.at(r, c, k);
                const double err = std::abs(a - n);
                const double tol = std::max(abs_floor, rel_tol * std::max(std::abs(a), std::abs(n)));
                const double ratio = err / tol;
                if (ratio > report.worst_ratio) {
                    report.worst_ratio = ratio;
                    report.worst_abs_err = err;
                    report.worst_row = r;
                    report.worst_col = c;
                    report.worst_channel = k;
                    report.analytic_at_worst = a;
                    report.numeric_at_worst = n;
                }
            }
        }
    }
    report.pass = report.worst_ratio <= 1.0;
    return report;
}

}  // namespace spen::gradcheck
