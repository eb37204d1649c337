#include "qdent/polarization.hpp"

#include <cmath>

namespace qdent {

Eigen::Vector2cd jones(Pol p) {
  using cd = std::complex<double>;
  const double s = 1.0 / std::sqrt(2.0);
  switch (p) {
    case Pol::H: return {cd(1, 0), cd(0, 0)};
    case Pol::V: return {cd(0, 0), cd(1, 0)};
    case Pol::D: return {cd(s, 0), cd(s, 0)};
    case Pol::A: return {cd(s, 0), cd(-s, 0)};
    case Pol::R: return {cd(s, 0), cd(0, s)};
    case Pol::L: return {cd(s, 0), cd(0, -s)};
  }
  return {};
}

Pol orthogonal(Pol p) {
  switch (p) {
    case Pol::H: return Pol::V;
    case Pol::V: return Pol::H;
    case Pol::D: return Pol::A;
    case Pol::A: return Pol::D;
    case Pol::R: return Pol::L;
    case Pol::L: return Pol::R;
  }
  return p;
}

char to_char(Pol p) {
  constexpr char names[] = {'H', 'V', 'D', 'A', 'R', 'L'};
  return names[static_cast<int>(p)];
}

std::optional<Pol> pol_from_char(char c) {
  for (Pol p : kAllPols) {
    if (to_char(p) == c) return p;
  }
  return std::nullopt;
}

Pol basis_reference(Basis b) {
  switch (b) {
    case Basis::Linear: return Pol::H;
    case Basis::Diagonal: return Pol::D;
    case Basis::Circular: return Pol::R;
  }
  return Pol::H;
}

std::string_view basis_name(Basis b) {
  switch (b) {
    case Basis::Linear: return "linear";
    case Basis::Diagonal: return "diagonal";
    case Basis::Circular: return "circular";
  }
  return "";
}

std::array<AnalyzerSetting, 4> basis_settings(Basis b) {
  const Pol p = basis_reference(b);
  const Pol q = orthogonal(p);
  return {AnalyzerSetting{p, p}, AnalyzerSetting{p, q}, AnalyzerSetting{q, p}, AnalyzerSetting{q, q}};
}

std::array<AnalyzerSetting, 12> tomography_settings() {
  std::array<AnalyzerSetting, 12> out{};
  std::size_t i = 0;
  for (Basis b : kAllBases) {
    for (const auto& s : basis_settings(b)) out[i++] = s;
  }
  return out;
}

}  // namespace qdent
