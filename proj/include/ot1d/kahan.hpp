#pragma once

namespace ot1d {

// Compensated (Kahan) accumulator. Used wherever probability masses or
// moment contributions are summed, so that bookkeeping error stays at a
// few ulps independent of the number of atoms.
class KahanSum {
 public:
  KahanSum() = default;
  explicit KahanSum(double init) : sum_(init) {}

  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  KahanSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace ot1d
