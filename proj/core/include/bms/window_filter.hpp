#pragma once

#include "bms/lti_model.hpp"
#include "bms/optimize.hpp"

#include <deque>
#include <optional>
#include <vector>

namespace bms {

struct WindowEstimate {
  std::vector<Vector> states;  // x_{t-N|t} ... x_{t|t}
  double cost = 0.0;
  SolveReport report;

  Vector stacked() const;
  static WindowEstimate from_stacked(const Vector& Y, int n);
};

// Streaming interface shared by all window estimators: begin(y_0), then
// advance(u_{t-1}, y_t) for t >= 1. An estimate is returned once the window
// holds N+1 outputs.
class WindowFilter {
 public:
  virtual ~WindowFilter() = default;
  virtual void begin(const Labels& y0) = 0;
  virtual std::optional<WindowEstimate> advance(const Vector& u_prev, const Labels& y) = 0;
  virtual int horizon() const = 0;
};

// Sliding buffers of inputs/outputs for a window of length N.
class WindowBuffer {
 public:
  explicit WindowBuffer(int N) : N_(N) {}
  void reset(const Labels& y0);
  // true once N inputs and N+1 outputs are held
  bool push(const Vector& u_prev, const Labels& y);
  void pop();
  std::vector<Vector> inputs() const { return {inputs_.begin(), inputs_.end()}; }
  std::vector<Labels> outputs() const { return {outputs_.begin(), outputs_.end()}; }
  const Vector& first_input() const { return inputs_.front(); }
  const Vector& last_input() const { return inputs_.back(); }
  bool started() const { return !outputs_.empty(); }

 private:
  int N_;
  std::deque<Vector> inputs_;
  std::deque<Labels> outputs_;
};

// Previous window shifted by one sample, last state propagated open loop.
Vector shifted_warm_start(const LinearSystem& sys, const WindowEstimate& est, const Vector& u_last);

}  // namespace bms
