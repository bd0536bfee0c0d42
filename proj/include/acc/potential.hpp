#pragma once

#include <cmath>
#include <variant>

namespace acc {

/// Harmonic springs for the first and second neighbor shells.
struct Harmonic {
  double k0 = 4.0;  ///< first-neighbor spring constant, > 0
  double k1 = 1.4;  ///< second-neighbor spring constant, >= 0
};

/// 12-6 pair potentials, one per neighbor shell, each with its minimum at the
/// shell's reference spacing so the undeformed lattice is an equilibrium.
/// Depths are chosen so the linearization about the reference reproduces a
/// prescribed pair of spring constants (U''(a) = 72 d / a^2 for the 12-6 form
/// with depth d and minimum at a).
struct LennardJones {
  double depth1 = 4.0 / 72.0;        ///< well depth, first shell (min at r=1)
  double depth2 = 1.4 * 4.0 / 72.0;  ///< well depth, second shell (min at r=2)
};

/// LennardJones whose linearized spring constants equal (k0, k1).
inline LennardJones lj_matching(double k0, double k1) {
  return LennardJones{k0 / 72.0, k1 * 4.0 / 72.0};
}

using Potential = std::variant<Harmonic, LennardJones>;

/// Reference (equilibrium) scaled distance of a shell: 1 or 2.
inline double shell_reference(int shell) { return static_cast<double>(shell); }

namespace detail {
// U(r) = d ((a/r)^12 - 2 (a/r)^6), shifted to 0 at the minimum.
inline double lj_e(double d, double a, double r) {
  double s = a / r, s6 = s * s * s * s * s * s;
  return d * (s6 * s6 - 2.0 * s6) + d;
}
inline double lj_d1(double d, double a, double r) {
  double s = a / r, s6 = s * s * s * s * s * s;
  return d * 12.0 * (s6 - s6 * s6) / r;
}
inline double lj_d2(double d, double a, double r) {
  double s = a / r, s6 = s * s * s * s * s * s;
  return d * 12.0 * (13.0 * s6 * s6 - 7.0 * s6) / (r * r);
}
}  // namespace detail

/// Pair energy of a bond in shell 1 or 2 at scaled distance r (= y-difference
/// over epsilon). Zero at the shell reference distance.
inline double shell_energy(const Potential& p, int shell, double r) {
  if (const auto* h = std::get_if<Harmonic>(&p)) {
    double k = (shell == 1) ? h->k0 : h->k1;
    double dr = r - shell_reference(shell);
    return 0.5 * k * dr * dr;
  }
  const auto& lj = std::get<LennardJones>(p);
  return (shell == 1) ? detail::lj_e(lj.depth1, 1.0, r)
                      : detail::lj_e(lj.depth2, 2.0, r);
}

inline double shell_d1(const Potential& p, int shell, double r) {
  if (const auto* h = std::get_if<Harmonic>(&p)) {
    double k = (shell == 1) ? h->k0 : h->k1;
    return k * (r - shell_reference(shell));
  }
  const auto& lj = std::get<LennardJones>(p);
  return (shell == 1) ? detail::lj_d1(lj.depth1, 1.0, r)
                      : detail::lj_d1(lj.depth2, 2.0, r);
}

inline double shell_d2(const Potential& p, int shell, double r) {
  if (const auto* h = std::get_if<Harmonic>(&p)) {
    return (shell == 1) ? h->k0 : h->k1;
  }
  const auto& lj = std::get<LennardJones>(p);
  return (shell == 1) ? detail::lj_d2(lj.depth1, 1.0, r)
                      : detail::lj_d2(lj.depth2, 2.0, r);
}

}  // namespace acc
