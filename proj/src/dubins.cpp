#include "offroad/dubins.hpp"

#include <cmath>
#include <limits>

namespace offroad {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mod2pi(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

// Segment types per word: 'L', 'S', 'R'.
constexpr char kTypes[6][3] = {
    {'L', 'S', 'L'}, {'R', 'S', 'R'}, {'L', 'S', 'R'}, {'R', 'S', 'L'}, {'R', 'L', 'R'}, {'L', 'R', 'L'},
};

Pose advance(Pose p, char type, double len, double rho) {
  if (type == 'S') return {p.x + len * std::cos(p.theta), p.y + len * std::sin(p.theta), p.theta};
  const double phi = len / rho;
  if (type == 'L') {
    return {p.x + rho * (std::sin(p.theta + phi) - std::sin(p.theta)),
            p.y - rho * (std::cos(p.theta + phi) - std::cos(p.theta)), wrap_angle(p.theta + phi)};
  }
  return {p.x - rho * (std::sin(p.theta - phi) - std::sin(p.theta)),
          p.y + rho * (std::cos(p.theta - phi) - std::cos(p.theta)), wrap_angle(p.theta - phi)};
}

// Normalised segment lengths (t, p, q) for one word; nullopt when infeasible.
std::optional<std::array<double, 3>> word_lengths(DubinsWord w, double d, double a, double b) {
  const double sa = std::sin(a), sb = std::sin(b), ca = std::cos(a), cb = std::cos(b);
  const double cab = std::cos(a - b);
  switch (w) {
    case DubinsWord::LSL: {
      const double p2 = 2 + d * d - 2 * cab + 2 * d * (sa - sb);
      if (p2 < 0) return std::nullopt;
      const double tmp = std::atan2(cb - ca, d + sa - sb);
      return std::array{mod2pi(-a + tmp), std::sqrt(p2), mod2pi(b - tmp)};
    }
    case DubinsWord::RSR: {
      const double p2 = 2 + d * d - 2 * cab + 2 * d * (sb - sa);
      if (p2 < 0) return std::nullopt;
      const double tmp = std::atan2(ca - cb, d - sa + sb);
      return std::array{mod2pi(a - tmp), std::sqrt(p2), mod2pi(-b + tmp)};
    }
    case DubinsWord::LSR: {
      const double p2 = -2 + d * d + 2 * cab + 2 * d * (sa + sb);
      if (p2 < 0) return std::nullopt;
      const double p = std::sqrt(p2);
      const double tmp = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
      return std::array{mod2pi(-a + tmp), p, mod2pi(-b + tmp)};
    }
    case DubinsWord::RSL: {
      const double p2 = -2 + d * d + 2 * cab - 2 * d * (sa + sb);
      if (p2 < 0) return std::nullopt;
      const double p = std::sqrt(p2);
      const double tmp = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
      return std::array{mod2pi(a - tmp), p, mod2pi(b - tmp)};
    }
    case DubinsWord::RLR: {
      const double c = (6 - d * d + 2 * cab + 2 * d * (sa - sb)) / 8;
      if (std::abs(c) > 1) return std::nullopt;
      const double p = mod2pi(kTwoPi - std::acos(c));
      const double t = mod2pi(a - std::atan2(ca - cb, d - sa + sb) + p / 2);
      return std::array{t, p, mod2pi(a - b - t + p)};
    }
    case DubinsWord::LRL: {
      const double c = (6 - d * d + 2 * cab + 2 * d * (sb - sa)) / 8;
      if (std::abs(c) > 1) return std::nullopt;
      const double p = mod2pi(kTwoPi - std::acos(c));
      const double t = mod2pi(-a - std::atan2(ca - cb, d + sa - sb) + p / 2);
      return std::array{t, p, mod2pi(b - a - t + p)};
    }
  }
  return std::nullopt;
}

}  // namespace

Pose DubinsPath::at(double s) const {
  Pose p = start;
  const char* types = kTypes[static_cast<int>(word)];
  for (int i = 0; i < 3; ++i) {
    if (s <= 0) break;
    const double len = std::min(s, lengths[i]);
    if (len <= 0) continue;
    p = advance(p, types[i], len, rho);
    s -= len;
  }
  return p;
}

std::vector<Pose> DubinsPath::sample(double step) const {
  std::vector<Pose> out;
  const double total = length();
  const int n = std::max(1, static_cast<int>(std::ceil(total / step - 1e-9)));
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) out.push_back(at(total * i / n));
  return out;
}

std::optional<DubinsPath> dubins_shortest(Pose from, Pose to, double rho) {
  if (!(rho > 0)) return std::nullopt;
  const double dx = to.x - from.x, dy = to.y - from.y;
  const double d = std::hypot(dx, dy) / rho;
  const double phi = std::atan2(dy, dx);
  const double a = mod2pi(from.theta - phi), b = mod2pi(to.theta - phi);
  std::optional<DubinsPath> best;
  for (int w = 0; w < 6; ++w) {
    const auto lens = word_lengths(static_cast<DubinsWord>(w), d, a, b);
    if (!lens) continue;
    DubinsPath path{from, rho, static_cast<DubinsWord>(w), {(*lens)[0] * rho, (*lens)[1] * rho, (*lens)[2] * rho}};
    if (best && path.length() >= best->length()) continue;
    // Guard against numerical slips: keep only words that actually land on the goal.
    const Pose end = path.at(path.length());
    const double tol = 1e-6 * std::max(1.0, rho);
    if (std::hypot(end.x - to.x, end.y - to.y) > tol || std::abs(wrap_angle(end.theta - to.theta)) > 1e-6)
      continue;
    best = path;
  }
  return best;
}

double dubins_length(Pose from, Pose to, double rho) {
  const auto p = dubins_shortest(from, to, rho);
  return p ? p->length() : std::numeric_limits<double>::infinity();
}

}  // namespace offroad
