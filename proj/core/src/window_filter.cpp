#include "bms/window_filter.hpp"

namespace bms {

Vector WindowEstimate::stacked() const {
  if (states.empty()) return Vector(0);
  const Eigen::Index n = states.front().size();
  Vector Y(n * static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) Y.segment(static_cast<Eigen::Index>(k) * n, n) = states[k];
  return Y;
}

WindowEstimate WindowEstimate::from_stacked(const Vector& Y, int n) {
  require(n > 0 && Y.size() % n == 0, "window estimate: stacked size is not a multiple of n");
  WindowEstimate e;
  for (Eigen::Index k = 0; k < Y.size() / n; ++k) e.states.push_back(Y.segment(k * n, n));
  return e;
}

void WindowBuffer::reset(const Labels& y0) {
  inputs_.clear();
  outputs_.clear();
  outputs_.push_back(y0);
}

bool WindowBuffer::push(const Vector& u_prev, const Labels& y) {
  require(started(), "filter: begin() must be called first");
  inputs_.push_back(u_prev);
  outputs_.push_back(y);
  return static_cast<int>(outputs_.size()) >= N_ + 1;
}

void WindowBuffer::pop() {
  inputs_.pop_front();
  outputs_.pop_front();
}

Vector shifted_warm_start(const LinearSystem& sys, const WindowEstimate& est, const Vector& u_last) {
  const int n = sys.n();
  const auto len = static_cast<int>(est.states.size());
  Vector w(len * n);
  for (int k = 0; k + 1 < len; ++k) w.segment(k * n, n) = est.states[static_cast<std::size_t>(k + 1)];
  w.segment((len - 1) * n, n) = sys.A * est.states.back() + sys.B * u_last;
  return w;
}

}  // namespace bms
