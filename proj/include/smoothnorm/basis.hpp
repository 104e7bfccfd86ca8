#pragma once

#include <span>
#include <vector>

namespace smoothnorm {

/// Largest basis order the library computes constants for.
inline constexpr int kMaxBasisOrder = 12;

/**
 * @brief The shifted Legendre system on [0,1], scaled to be orthonormal.
 *
 * pi_0 is identically 1 and pi_k(z) = sqrt(2k+1) P_k(2z-1) for the classic
 * Legendre polynomial P_k, so that the integral of pi_k pi_l over [0,1]
 * is the Kronecker delta. Values are produced by the three-term recurrence,
 * which stays stable where the explicit binomial expansion cancels.
 */
class OrthonormalBasis {
  public:
    /// @throws config_error unless 1 <= K <= kMaxBasisOrder
    explicit OrthonormalBasis(int K);

    [[nodiscard]] int order() const { return order_; }

    /// Value of pi_k at z.
    /// @throws std::domain_error if z is outside [0,1] or k outside [0,order]
    [[nodiscard]] double pi(int k, double z) const;

    /// Fills out[k-1] with pi_k(z) for k = 1..order in one recurrence pass.
    void eval_nonconstant(double z, std::span<double> out) const;

  private:
    int order_;
};

/**
 * @brief The two vectors of basis-vs-normal-score integrals that drive the
 * estimation-effect correction.
 *
 * c1[k-1] is the integral of pi_k(z) * Q(z) over [0,1] and c2[k-1] the
 * integral of pi_k(z) * Q(z)^2, with Q the standard normal quantile. By the
 * antisymmetry of Q about z = 1/2, c1 vanishes for even k and c2 for odd k.
 */
struct BasisConstants {
    std::vector<double> c1;
    std::vector<double> c2;

    [[nodiscard]] int order() const { return static_cast<int>(c1.size()); }
};

/**
 * @brief Compute BasisConstants of the given order by quadrature.
 *
 * The integrals are evaluated after substituting z = Phi(x), i.e. as
 * integrals of pi_k(Phi(x)) x phi(x) and pi_k(Phi(x)) x^2 phi(x) over
 * x in [-8, 8], where the integrand is smooth; the z-domain form has
 * integrable endpoint singularities. Composite Gauss-Legendre on unit
 * panels; a doubled-resolution self-check guards the result.
 *
 * @param quad_points total node budget, at least 200
 * @throws config_error if arguments are out of range or the self-check fails
 */
[[nodiscard]] BasisConstants compute_constants(int K, int quad_points = 512);

/// Process-wide constants at kMaxBasisOrder, computed once; thread-safe.
[[nodiscard]] const BasisConstants& cached_constants();

namespace detail {

/// Unchecked recurrence: fills out[0..K] with pi_0(z)..pi_K(z).
void eval_pi_all(int K, double z, double* out);

}  // namespace detail

}  // namespace smoothnorm
