#include "dialmark/gp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "dialmark/rl.hpp"

namespace dialmark {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// The sparsification threshold and the exploration scale both assume
// unit-norm inputs (prior variance k(z,z) = 1 at every fresh point), so all
// feature vectors are projected onto the unit sphere before touching a
// kernel.
std::vector<double> unit(const std::vector<double>& b) {
  double n2 = dot(b, b);
  if (n2 <= 0.0) return b;
  std::vector<double> u(b.size());
  double inv = 1.0 / std::sqrt(n2);
  for (std::size_t i = 0; i < b.size(); ++i) u[i] = b[i] * inv;
  return u;
}

}  // namespace

GpPolicy::GpPolicy(const ItemSet& domain, GpConfig config, bool with_group)
    : domain_(&domain),
      config_(config),
      with_group_(with_group),
      n_actions_(n_summary_actions(BeliefTracker(domain).n_constrainable())),
      blocks_(static_cast<std::size_t>(n_actions_)) {}

GpPolicy::GpPolicy(int n_actions, GpConfig config)
    : config_(config),
      n_actions_(n_actions),
      blocks_(static_cast<std::size_t>(n_actions)) {}

GpPolicy::Projection GpPolicy::project(const std::vector<double>& b, int action) const {
  const Block& blk = blocks_[action];
  const std::size_t n = blk.points.size();
  Projection p;
  double kzz = dot(b, b);
  if (n == 0) {
    p.residual = kzz;
    return p;
  }
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = dot(blk.points[i], b);
  p.coeffs.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &blk.kinv[i * n];
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * k[j];
    p.coeffs[i] = s;
  }
  p.residual = kzz - dot(k, p.coeffs);
  return p;
}

GpStat GpPolicy::stat_at(const std::vector<double>& b, int action) const {
  const Block& blk = blocks_[action];
  if (eval_only_) {
    double mean = 0.0;
    for (std::size_t i = 0; i < blk.points.size(); ++i)
      mean += alpha_[blk.global[i]] * dot(blk.points[i], b);
    return {mean, dot(b, b)};
  }
  Projection p = project(b, action);
  const std::size_t d = mu_.size();
  double mean = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
    int gi = blk.global[i];
    mean += p.coeffs[i] * mu_[gi];
    double sg = 0.0;
    for (std::size_t j = 0; j < p.coeffs.size(); ++j)
      sg += S_[static_cast<std::size_t>(gi) * d + blk.global[j]] * p.coeffs[j];
    quad += p.coeffs[i] * sg;
  }
  return {mean, std::max(0.0, std::max(0.0, p.residual) + quad)};
}

std::vector<GpStat> GpPolicy::q_stats(const std::vector<double>& features) const {
  const std::vector<double> nb = unit(features);
  std::vector<GpStat> out(static_cast<std::size_t>(n_actions_));
  for (int a = 0; a < n_actions_; ++a) out[a] = stat_at(nb, a);
  return out;
}

std::vector<double> GpPolicy::q_values(const std::vector<double>& features) const {
  const std::vector<double> nb = unit(features);
  std::vector<double> out(static_cast<std::size_t>(n_actions_));
  for (int a = 0; a < n_actions_; ++a) out[a] = stat_at(nb, a).mean;
  return out;
}

void GpPolicy::begin_episode(RandomStream&) {
  have_pending_ = false;
  have_reward_ = false;
}

int GpPolicy::act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) {
  return select_action(t.featurize(with_group_), legal, rng);
}

int GpPolicy::select_action(const std::vector<double>& features, const std::vector<bool>& legal,
                            RandomStream& rng) {
  if (training_ && eval_only_)
    throw std::logic_error("restored checkpoint is evaluation-only");
  const std::vector<double> nb = unit(features);
  std::vector<double> score(legal.size(), 0.0);
  for (std::size_t a = 0; a < legal.size(); ++a) {
    if (!legal[a]) continue;
    GpStat st = stat_at(nb, static_cast<int>(a));
    score[a] = training_ ? rng.normal(st.mean, config_.scale * std::sqrt(st.var)) : st.mean;
  }
  int action = argmax_allowed(score, legal);

  if (training_) {
    consider_add(nb, action);
    if (have_pending_ && have_reward_) complete_pending(&nb, action);
    pending_b_ = nb;
    pending_action_ = action;
    have_pending_ = true;
    have_reward_ = false;
  }
  return action;
}

void GpPolicy::observe(double reward, const BeliefTracker&, const std::vector<bool>&, bool done) {
  observe_reward(reward, done);
}

void GpPolicy::observe_reward(double reward, bool done) {
  if (!training_ || !have_pending_) return;
  if (eval_only_) throw std::logic_error("restored checkpoint is evaluation-only");
  pending_reward_ = reward;
  have_reward_ = true;
  if (done) {
    complete_pending(nullptr, 0);
    have_pending_ = false;
    have_reward_ = false;
  }
}

void GpPolicy::complete_pending(const std::vector<double>* next_b, int next_action) {
  // Projections are taken fresh: the dictionary may have changed since the
  // pending point was selected.
  std::vector<std::pair<int, double>> h;
  Projection prev = project(pending_b_, pending_action_);
  const Block& pb = blocks_[pending_action_];
  for (std::size_t i = 0; i < prev.coeffs.size(); ++i)
    if (prev.coeffs[i] != 0.0) h.emplace_back(pb.global[i], prev.coeffs[i]);
  if (next_b != nullptr) {
    Projection nx = project(*next_b, next_action);
    const Block& nb = blocks_[next_action];
    for (std::size_t i = 0; i < nx.coeffs.size(); ++i)
      if (nx.coeffs[i] != 0.0) h.emplace_back(nb.global[i], -config_.gamma * nx.coeffs[i]);
  }
  apply_row(h, pending_reward_);
}

void GpPolicy::apply_row(const std::vector<std::pair<int, double>>& h, double y) {
  if (h.empty()) return;
  const std::size_t d = mu_.size();
  std::vector<double> g(d, 0.0);
  for (const auto& [i, c] : h)
    for (std::size_t j = 0; j < d; ++j) g[j] += S_[j * d + i] * c;
  double s = config_.noise;
  double pred = 0.0;
  for (const auto& [i, c] : h) {
    s += c * g[i];
    pred += c * mu_[i];
  }
  if (s <= 1e-12) return;
  double step = (y - pred) / s;
  for (std::size_t j = 0; j < d; ++j) mu_[j] += g[j] * step;
  for (std::size_t j = 0; j < d; ++j) {
    double gj = g[j] / s;
    if (gj == 0.0) continue;
    double* row = &S_[j * d];
    for (std::size_t k = 0; k < d; ++k) row[k] -= gj * g[k];
  }
}

bool GpPolicy::consider_add(const std::vector<double>& b, int action) {
  Projection p = project(b, action);
  if (p.residual <= config_.nu) return false;
  if (dict_size() >= config_.max_dict) {
    evict_lowest_residual();
    // Losing a point can only raise residuals, but recompute under the new
    // dictionary so the bordered update stays exact.
    p = project(b, action);
    if (p.residual <= config_.nu) return false;
  }
  add_point(b, action, p);
  return true;
}

void GpPolicy::add_point(const std::vector<double>& b, int action, const Projection& proj) {
  Block& blk = blocks_[action];
  const std::size_t n = blk.points.size();
  const std::size_t d = mu_.size();
  const double delta = proj.residual;

  std::vector<double> kinv((n + 1) * (n + 1), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      kinv[i * (n + 1) + j] = blk.kinv[i * n + j] + proj.coeffs[i] * proj.coeffs[j] / delta;
  for (std::size_t i = 0; i < n; ++i) {
    kinv[i * (n + 1) + n] = -proj.coeffs[i] / delta;
    kinv[n * (n + 1) + i] = -proj.coeffs[i] / delta;
  }
  kinv[n * (n + 1) + n] = 1.0 / delta;
  blk.kinv = std::move(kinv);

  // The new value conditions on the dictionary as coeffs^T f plus an
  // independent residual, which fixes its posterior mean and covariances.
  double mean_new = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_new += proj.coeffs[i] * mu_[blk.global[i]];
  std::vector<double> cross(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += S_[j * d + blk.global[i]] * proj.coeffs[i];
    cross[j] = s;
  }
  double corner = delta;
  for (std::size_t i = 0; i < n; ++i) corner += proj.coeffs[i] * cross[blk.global[i]];

  std::vector<double> grown((d + 1) * (d + 1));
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < d; ++k) grown[j * (d + 1) + k] = S_[j * d + k];
    grown[j * (d + 1) + d] = cross[j];
    grown[d * (d + 1) + j] = cross[j];
  }
  grown[d * (d + 1) + d] = corner;
  S_ = std::move(grown);
  mu_.push_back(mean_new);

  blk.points.push_back(b);
  blk.global.push_back(static_cast<int>(d));
  entry_action_.push_back(action);
  entry_pos_.push_back(static_cast<int>(n));
}

void GpPolicy::evict_lowest_residual() {
  // A dictionary point's residual against its peers is the reciprocal of its
  // kernel-inverse diagonal, so the largest diagonal marks the most redundant
  // point.
  int victim = -1;
  double largest = -1.0;
  for (int g = 0; g < dict_size(); ++g) {
    const Block& blk = blocks_[entry_action_[g]];
    std::size_t n = blk.points.size();
    double diag = blk.kinv[static_cast<std::size_t>(entry_pos_[g]) * n + entry_pos_[g]];
    if (diag > largest) {
      largest = diag;
      victim = g;
    }
  }
  if (victim < 0) return;

  const int action = entry_action_[victim];
  const std::size_t pos = static_cast<std::size_t>(entry_pos_[victim]);
  Block& blk = blocks_[action];
  const std::size_t n = blk.points.size();

  std::vector<double> kinv((n - 1) * (n - 1));
  const double c = blk.kinv[pos * n + pos];
  for (std::size_t i = 0, ii = 0; i < n; ++i) {
    if (i == pos) continue;
    for (std::size_t j = 0, jj = 0; j < n; ++j) {
      if (j == pos) continue;
      kinv[ii * (n - 1) + jj] = blk.kinv[i * n + j] - blk.kinv[i * n + pos] * blk.kinv[pos * n + j] / c;
      ++jj;
    }
    ++ii;
  }
  blk.kinv = std::move(kinv);
  blk.points.erase(blk.points.begin() + pos);
  blk.global.erase(blk.global.begin() + pos);
  for (int g : blk.global)
    if (entry_pos_[g] > static_cast<int>(pos)) --entry_pos_[g];

  const std::size_t d = mu_.size();
  mu_.erase(mu_.begin() + victim);
  std::vector<double> shrunk((d - 1) * (d - 1));
  for (std::size_t j = 0, jj = 0; j < d; ++j) {
    if (j == static_cast<std::size_t>(victim)) continue;
    for (std::size_t k = 0, kk = 0; k < d; ++k) {
      if (k == static_cast<std::size_t>(victim)) continue;
      shrunk[jj * (d - 1) + kk] = S_[j * d + k];
      ++kk;
    }
    ++jj;
  }
  S_ = std::move(shrunk);
  entry_action_.erase(entry_action_.begin() + victim);
  entry_pos_.erase(entry_pos_.begin() + victim);
  for (Block& bb : blocks_)
    for (int& g : bb.global)
      if (g > victim) --g;
}

std::string GpPolicy::checkpoint_json() const {
  std::vector<double> alpha(mu_.size(), 0.0);
  if (eval_only_) {
    alpha = alpha_;
  } else {
    // Mean as a kernel expansion: mean(z) = sum_i alpha_i k(z_i, z) with
    // alpha = Kinv mu, block by block.
    for (const Block& blk : blocks_) {
      const std::size_t n = blk.points.size();
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += blk.kinv[i * n + j] * mu_[blk.global[j]];
        alpha[blk.global[i]] = s;
      }
    }
  }

  nlohmann::json dict = nlohmann::json::array();
  for (int g = 0; g < dict_size(); ++g) {
    const Block& blk = blocks_[entry_action_[g]];
    dict.push_back({{"a", entry_action_[g]}, {"b", blk.points[entry_pos_[g]]}});
  }
  nlohmann::json j;
  j["kind"] = "gp";
  j["domain"] = domain_ ? domain_->name : "";
  j["with_group"] = with_group_;
  j["actions"] = n_actions_;
  j["dict"] = dict;
  j["alpha"] = alpha;
  return j.dump();
}

void GpPolicy::restore_checkpoint_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  if (j.at("kind") != "gp") throw std::runtime_error("checkpoint: not a gp checkpoint");
  if (domain_ && j.at("domain").get<std::string>() != domain_->name)
    throw std::runtime_error("checkpoint: domain mismatch");
  if (j.at("with_group").get<bool>() != with_group_)
    throw std::runtime_error("checkpoint: featurization mode mismatch");
  if (j.at("actions").get<int>() != n_actions_)
    throw std::runtime_error("checkpoint: action count mismatch");

  blocks_.assign(static_cast<std::size_t>(n_actions_), {});
  entry_action_.clear();
  entry_pos_.clear();
  mu_.clear();
  S_.clear();
  alpha_ = j.at("alpha").get<std::vector<double>>();
  for (const auto& e : j.at("dict")) {
    int a = e.at("a").get<int>();
    if (a < 0 || a >= n_actions_) throw std::runtime_error("checkpoint: action out of range");
    Block& blk = blocks_[a];
    entry_action_.push_back(a);
    entry_pos_.push_back(static_cast<int>(blk.points.size()));
    blk.global.push_back(static_cast<int>(entry_action_.size()) - 1);
    blk.points.push_back(e.at("b").get<std::vector<double>>());
  }
  if (alpha_.size() != entry_action_.size())
    throw std::runtime_error("checkpoint: coefficient count does not match dictionary");

  eval_only_ = true;
  training_ = false;
  have_pending_ = false;
  have_reward_ = false;
}

}  // namespace dialmark
