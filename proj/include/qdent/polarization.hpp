#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace qdent {

// Six-element polarization alphabet used by the analyzers.
enum class Pol { H, V, D, A, R, L };

inline constexpr std::array<Pol, 6> kAllPols = {Pol::H, Pol::V, Pol::D, Pol::A, Pol::R, Pol::L};

// Jones vector in the (H, V) basis.
Eigen::Vector2cd jones(Pol p);

// The orthogonal partner within the same basis (H<->V, D<->A, R<->L).
Pol orthogonal(Pol p);

char to_char(Pol p);
std::optional<Pol> pol_from_char(char c);

// Analyzer orientation for the XX and X arms.
struct AnalyzerSetting {
  Pol basis_xx = Pol::H;
  Pol basis_x = Pol::H;

  std::string label() const { return {to_char(basis_xx), to_char(basis_x)}; }
  friend bool operator==(const AnalyzerSetting&, const AnalyzerSetting&) = default;
};

enum class Basis { Linear, Diagonal, Circular };

inline constexpr std::array<Basis, 3> kAllBases = {Basis::Linear, Basis::Diagonal, Basis::Circular};

// Reference polarization of a basis (H, D or R).
Pol basis_reference(Basis b);
std::string_view basis_name(Basis b);

// The four analyzer settings of one basis, ordered as
// (co, cross, cross, co): (P,P), (P,P'), (P',P), (P',P').
std::array<AnalyzerSetting, 4> basis_settings(Basis b);

// All twelve settings, basis-major in the order of basis_settings().
std::array<AnalyzerSetting, 12> tomography_settings();

}  // namespace qdent
