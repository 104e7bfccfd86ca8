#include "smoothnorm/basis.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "smoothnorm/errors.hpp"
#include "smoothnorm/special_functions.hpp"

namespace smoothnorm {

namespace detail {

namespace {
// sqrt(2k+1) for k = 0..kMaxBasisOrder
constexpr std::array<double, kMaxBasisOrder + 1> kScale = [] {
    std::array<double, kMaxBasisOrder + 1> s{};
    for (int k = 0; k <= kMaxBasisOrder; ++k) {
        // constexpr sqrt via Newton, exact enough at compile time
        double x = 2.0 * k + 1.0;
        double r = x;
        for (int i = 0; i < 60; ++i) r = 0.5 * (r + x / r);
        s[k] = r;
    }
    return s;
}();
}  // namespace

void eval_pi_all(int K, double z, double* out) {
    const double t = 2.0 * z - 1.0;
    out[0] = 1.0;
    if (K < 1) return;
    double prev = 1.0;
    double cur = t;
    out[1] = kScale[1] * t;
    for (int n = 1; n < K; ++n) {
        const double next = ((2.0 * n + 1.0) * t * cur - n * prev) / (n + 1.0);
        prev = cur;
        cur = next;
        out[n + 1] = kScale[n + 1] * next;
    }
}

}  // namespace detail

OrthonormalBasis::OrthonormalBasis(int K) : order_(K) {
    if (K < 1 || K > kMaxBasisOrder) {
        throw config_error("OrthonormalBasis: order must lie in [1, " +
                           std::to_string(kMaxBasisOrder) + "]");
    }
}

double OrthonormalBasis::pi(int k, double z) const {
    if (k < 0 || k > order_) throw std::domain_error("OrthonormalBasis::pi: k out of range");
    if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("OrthonormalBasis::pi: z must lie in [0,1]");
    std::array<double, kMaxBasisOrder + 1> buf;
    detail::eval_pi_all(k, z, buf.data());
    return buf[k];
}

void OrthonormalBasis::eval_nonconstant(double z, std::span<double> out) const {
    if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("OrthonormalBasis: z must lie in [0,1]");
    if (out.size() != static_cast<std::size_t>(order_)) {
        throw std::invalid_argument("OrthonormalBasis: output span must have length K");
    }
    std::array<double, kMaxBasisOrder + 1> buf;
    detail::eval_pi_all(order_, z, buf.data());
    for (int k = 1; k <= order_; ++k) out[k - 1] = buf[k];
}

namespace {

BasisConstants constants_at_resolution(int K, int points_per_panel) {
    // 16 unit-width panels spanning [-8, 8]; the integrand decays like
    // x^2 phi(x), so the truncation contributes < 1e-14.
    std::vector<long double> acc1(K, 0.0L);
    std::vector<long double> acc2(K, 0.0L);
    std::array<double, kMaxBasisOrder + 1> pi_buf;
    for (int panel = 0; panel < 16; ++panel) {
        const double a = -8.0 + panel;
        const auto rule = gauss_legendre_rule(points_per_panel, a, a + 1.0);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double x = rule.nodes[i];
            const double base = rule.weights[i] * std_normal_pdf(x) * x;
            detail::eval_pi_all(K, std_normal_cdf(x), pi_buf.data());
            for (int k = 1; k <= K; ++k) {
                acc1[k - 1] += base * pi_buf[k];
                acc2[k - 1] += base * x * pi_buf[k];
            }
        }
    }
    BasisConstants out;
    out.c1.resize(K);
    out.c2.resize(K);
    for (int k = 0; k < K; ++k) {
        out.c1[k] = static_cast<double>(acc1[k]);
        out.c2[k] = static_cast<double>(acc2[k]);
    }
    return out;
}

}  // namespace

BasisConstants compute_constants(int K, int quad_points) {
    if (K < 1 || K > kMaxBasisOrder) {
        throw config_error("compute_constants: K must lie in [1, " +
                           std::to_string(kMaxBasisOrder) + "]");
    }
    if (quad_points < 200) {
        throw config_error("compute_constants: quad_points must be at least 200");
    }
    const int per_panel = (quad_points + 15) / 16;
    const BasisConstants coarse = constants_at_resolution(K, per_panel);
    const BasisConstants fine = constants_at_resolution(K, 2 * per_panel);
    double max_diff = 0.0;
    for (int k = 0; k < K; ++k) {
        max_diff = std::max(max_diff, std::fabs(coarse.c1[k] - fine.c1[k]));
        max_diff = std::max(max_diff, std::fabs(coarse.c2[k] - fine.c2[k]));
    }
    if (max_diff > 1e-10) {
        throw config_error(
            "compute_constants: quadrature self-check failed; doubling the resolution moved a "
            "constant by " +
            std::to_string(max_diff) + " (raise quad_points)");
    }
    return fine;
}

const BasisConstants& cached_constants() {
    static const BasisConstants instance = compute_constants(kMaxBasisOrder);
    return instance;
}

}  // namespace smoothnorm
