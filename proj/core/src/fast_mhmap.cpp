#include "bms/fast_mhmap.hpp"

#include "bms/error.hpp"
#include "bms/parallel.hpp"

#include <chrono>

namespace bms::fast {

LocalModel LocalModel::make(int K, double Ts, double q, double arrival_weight) {
  require(K == 0 || K == 1, "local model: K must be 0 or 1");
  require(Ts > 0.0 && q > 0.0 && arrival_weight > 0.0, "local model: Ts, q and the arrival weight must be positive");
  LocalModel lm;
  lm.K = K;
  lm.Ts = Ts;
  lm.C_tilde = Vector::Zero(K + 1);
  lm.C_tilde(0) = 1.0;
  lm.Psi_tilde = arrival_weight * Matrix::Identity(K + 1, K + 1);
  if (K == 0) {
    lm.A_tilde = Matrix::Identity(1, 1);
    lm.G_tilde = Matrix::Constant(1, 1, 1.0 / q);
  } else {
    lm.A_tilde.resize(2, 2);
    lm.A_tilde << 1.0, Ts, 0.0, 1.0;
    Matrix cov(2, 2);
    cov << Ts * Ts * Ts / 3.0, Ts * Ts / 2.0, Ts * Ts / 2.0, Ts;
    lm.G_tilde = (q * cov).inverse();
  }
  lm.validate();
  return lm;
}

LinearSystem LocalModel::system() const {
  LinearSystem sys;
  sys.A = A_tilde;
  sys.B = Matrix::Zero(K + 1, 1);
  sys.C = C_tilde.transpose();
  return sys;
}

void LocalModel::validate() const {
  require(K == 0 || K == 1, "local model: K must be 0 or 1");
  require(A_tilde.rows() == K + 1 && A_tilde.cols() == K + 1, "local model: A_tilde has the wrong shape");
  if (!is_spd(G_tilde) || !is_spd(Psi_tilde)) throw WeightError("local model: G_tilde and Psi_tilde must be SPD");
}

namespace {

GaussianPriors local_priors(const LocalModel& local, const Vector& prediction) {
  GaussianPriors pr;
  pr.x0_mean = prediction;
  pr.P = local.Psi_tilde;
  pr.G = local.G_tilde;
  pr.Psi = local.Psi_tilde;
  return pr;
}

BinarySensor local_sensor(const LocalModel& local, const BinarySensor& s) {
  BinarySensor ls = s;
  ls.row = local.C_tilde;
  return ls;
}

}  // namespace

LocalEstimate local_map_step(const LocalModel& local, const BinarySensor& sensor, const std::vector<Labels>& outputs,
                             const Vector& prediction, const std::optional<Vector>& warm_start) {
  local.validate();
  require(prediction.size() == local.dim(), "local step: prediction has the wrong size");
  const int N = static_cast<int>(outputs.size()) - 1;
  require(N >= 1, "local step: window needs at least two samples");
  const std::vector<Vector> inputs(static_cast<std::size_t>(N), Vector::Zero(1));
  const MheWindow w = MheWindow::make(inputs, outputs, prediction);
  const WindowEstimate e =
      solve_mh_map(local.system(), {local_sensor(local, sensor)}, local_priors(local, prediction), w, warm_start);
  LocalEstimate out;
  out.chi = e.states;
  for (const auto& c : e.states) out.sigma.push_back(local.C_tilde.dot(c));
  out.report = e.report;
  out.variables = local.dim() * (N + 1);
  return out;
}

GlobalFuser::GlobalFuser(const fem::FieldModel& model, const std::vector<fem::SensorRow>& rows,
                         const Vector& gamma_bc, GlobalWeights weights)
    : A_(model.A), b_(model.drive()), w_(std::move(weights)) {
  const int m = model.m();
  if (w_.Psi.rows() != m || !is_spd(w_.Psi)) throw WeightError("global fuse: Psi must be SPD m x m");
  if (w_.Q.rows() != m || !is_spd(w_.Q)) throw WeightError("global fuse: Q must be SPD m x m");
  const auto p = static_cast<Eigen::Index>(rows.size());
  C_.resize(p, m);
  offset_.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    require(r.C.size() == m && r.D.size() == gamma_bc.size(), "global fuse: sensor row sizes do not match");
    C_.row(i) = r.C.transpose();
    offset_(i) = r.D.dot(gamma_bc);
  }
  QA_ = w_.Q * A_;
  AtQA_ = A_.transpose() * QA_;
  Qb_ = w_.Q * b_;
  AtQb_ = A_.transpose() * Qb_;
}

WindowEstimate GlobalFuser::fuse(const PseudoMeasurementSet& pseudo, const Vector& prediction) const {
  const auto start = std::chrono::steady_clock::now();
  const int m = static_cast<int>(A_.rows());
  const int N = static_cast<int>(pseudo.sigma.size()) - 1;
  require(N >= 1, "global fuse: need at least two pseudo-measurement instants");
  require(pseudo.Xi.size() == C_.rows(), "global fuse: one weight per sensor");
  require(prediction.size() == m, "global fuse: prediction has the wrong size");

  const Matrix Hs = C_.transpose() * pseudo.Xi.asDiagonal() * C_;
  BlockTridiagonal M(N + 1, m);
  Vector D = Vector::Zero((N + 1) * m);
  for (int k = 0; k <= N; ++k) {
    auto d = M.diag(k);
    d = Hs;
    if (k == 0) d += w_.Psi;
    if (k > 0) d += w_.Q;
    if (k < N) d += AtQA_;
    if (k < N) M.lower(k) = -QA_;
    const Vector& sig = pseudo.sigma[static_cast<std::size_t>(k)];
    require(sig.size() == C_.rows(), "global fuse: pseudo-measurement size mismatch");
    Vector rhs = C_.transpose() * (pseudo.Xi.asDiagonal() * (sig - offset_));
    if (k == 0) rhs += w_.Psi * prediction;
    if (k > 0) rhs += Qb_;
    if (k < N) rhs -= AtQb_;
    D.segment(k * m, m) = rhs;
  }
  BlockTridiagonalCholesky chol(M);
  ++factorizations_;
  const Vector Y = chol.solve(D);
  WindowEstimate e = WindowEstimate::from_stacked(Y, m);
  e.cost = cost_grad(pseudo, prediction, Y, nullptr);
  e.report.iterations = 1;
  e.report.status = SolveStatus::converged;
  e.report.tolerance = tol::kSolve;
  e.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return e;
}

double GlobalFuser::cost_grad(const PseudoMeasurementSet& pseudo, const Vector& prediction, const Vector& X,
                              Vector* grad) const {
  const int m = static_cast<int>(A_.rows());
  const int N = static_cast<int>(pseudo.sigma.size()) - 1;
  require(X.size() == (N + 1) * m, "global cost: stacked state has the wrong size");
  if (grad) grad->setZero((N + 1) * m);
  const Vector e0 = X.head(m) - prediction;
  const Vector Pe0 = w_.Psi * e0;
  double cost = e0.dot(Pe0);
  if (grad) grad->head(m) += 2.0 * Pe0;
  for (int k = 0; k < N; ++k) {
    const Vector r = X.segment((k + 1) * m, m) - A_ * X.segment(k * m, m) - b_;
    const Vector Qr = w_.Q * r;
    cost += r.dot(Qr);
    if (grad) {
      grad->segment((k + 1) * m, m) += 2.0 * Qr;
      grad->segment(k * m, m) -= 2.0 * A_.transpose() * Qr;
    }
  }
  for (int k = 0; k <= N; ++k) {
    const Vector res = pseudo.sigma[static_cast<std::size_t>(k)] - C_ * X.segment(k * m, m) - offset_;
    const Vector wres = pseudo.Xi.asDiagonal() * res;
    cost += res.dot(wres);
    if (grad) grad->segment(k * m, m) -= 2.0 * C_.transpose() * wres;
  }
  return cost;
}

WindowEstimate global_fuse(const fem::FieldModel& model, const std::vector<fem::SensorRow>& rows,
                           const Vector& gamma_bc, const PseudoMeasurementSet& pseudo, const Vector& prediction,
                           const GlobalWeights& weights) {
  return GlobalFuser(model, rows, gamma_bc, weights).fuse(pseudo, prediction);
}

FastMhMapFilter::FastMhMapFilter(const fem::FieldModel& model, std::vector<fem::SensorRow> rows,
                                 std::vector<BinarySensor> sensors, Vector gamma_bc, GlobalWeights weights,
                                 Vector prior, FastFilterOptions options)
    : sensors_(std::move(sensors)),
      options_(std::move(options)),
      fuser_(model, rows, gamma_bc, std::move(weights)),
      prediction_(std::move(prior)) {
  const auto p = sensors_.size();
  require(rows.size() == p, "fast filter: one sensor row per sensor");
  require(options_.local_horizon >= 1 && options_.local_horizon <= options_.aggregation,
          "fast filter: local horizon must be between 1 and the aggregation length");
  require(options_.horizon >= 1, "fast filter: horizon must be at least 1");
  require(prediction_.size() == model.m(), "fast filter: prior has the wrong size");
  Xi_.resize(static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i)
    Xi_(static_cast<Eigen::Index>(i)) = options_.Xi.empty() ? 1.0 / sensors_[i].noise_variance : options_.Xi[i];
  options_.local.validate();
  const LinearSystem ls = options_.local.system();
  for (std::size_t i = 0; i < p; ++i) {
    // local prior: the sensor's view of the global prior
    Vector chi0 = Vector::Zero(options_.local.dim());
    chi0(0) = rows[i].C.dot(prediction_) + rows[i].D.dot(gamma_bc);
    locals_.emplace_back(ls, std::vector<BinarySensor>{local_sensor(options_.local, sensors_[i])},
                         local_priors(options_.local, chi0), options_.local_horizon);
  }
  started_.assign(p, false);
  recent_.resize(p);
}

void FastMhMapFilter::local_update(const Labels& y) {
  const int p = static_cast<int>(sensors_.size());
  require(y.size() == p, "fast filter: one label per sensor");
  const Vector u0 = Vector::Zero(1);
  std::vector<std::optional<double>> sigma(static_cast<std::size_t>(p));
  parallel_for(p, options_.threads, [&](int i) {
    const auto ii = static_cast<std::size_t>(i);
    const Labels yi = Labels::Constant(1, y(i));
    if (!started_[ii]) {
      locals_[ii].begin(yi);
      return;
    }
    auto est = locals_[ii].advance(u0, yi);
    if (est) sigma[ii] = options_.local.C_tilde.dot(est->states.back());
  });
  for (int i = 0; i < p; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    if (!started_[ii]) {
      started_[ii] = true;
      continue;
    }
    ++local_calls_;
    if (sigma[ii]) {
      recent_[ii].push_back(*sigma[ii]);
      while (static_cast<int>(recent_[ii].size()) > options_.aggregation) recent_[ii].pop_front();
    }
  }
}

std::optional<WindowEstimate> FastMhMapFilter::fuse_tick() {
  const auto p = static_cast<Eigen::Index>(sensors_.size());
  Vector s(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    auto& r = recent_[static_cast<std::size_t>(i)];
    require(!r.empty(), "fast filter: fusion tick before every local filter produced an estimate");
    double sum = 0.0;
    for (double v : r) sum += v;
    s(i) = sum / static_cast<double>(r.size());
    r.clear();
  }
  sigma_window_.push_back(std::move(s));
  if (static_cast<int>(sigma_window_.size()) < options_.horizon + 1) return std::nullopt;
  PseudoMeasurementSet pseudo{{sigma_window_.begin(), sigma_window_.end()}, Xi_};
  WindowEstimate est = fuser_.fuse(pseudo, prediction_);
  prediction_ = est.states[1];
  sigma_window_.pop_front();
  return est;
}

}  // namespace bms::fast
