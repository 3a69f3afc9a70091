#ifndef MARD_INTERVAL_HPP_
#define MARD_INTERVAL_HPP_

namespace mard {

// Closed interval [lo, hi]; endpoints count as inside.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
  double center() const { return (lo + hi) / 2.0; }
};

// Axis-aligned rectangle in the arousal/valence plane: the Cartesian
// product of two per-coordinate credible intervals.
struct CredibleRegion {
  Interval arousal;
  Interval valence;

  bool contains(double a, double v) const {
    return arousal.contains(a) && valence.contains(v);
  }
};

}  // namespace mard

#endif  // MARD_INTERVAL_HPP_
