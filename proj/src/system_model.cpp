#include "mecoff/system_model.hpp"

#include <algorithm>
#include <cmath>

#include "mecoff/error.hpp"

namespace mecoff {

OffloadDecision OffloadDecision::all_local(int num_devices) {
  return {std::vector<int>(num_devices, 0), std::vector<double>(num_devices, 0.0)};
}

OffloadDecision OffloadDecision::all_offload(int num_devices) {
  return {std::vector<int>(num_devices, 1), std::vector<double>(num_devices, 1.0)};
}

OffloadDecision OffloadDecision::from_set(int num_devices, const std::vector<int>& offload_set) {
  auto d = all_local(num_devices);
  for (int k : offload_set) {
    d.c.at(k) = 1;
    d.scores.at(k) = 1.0;
  }
  return d;
}

std::vector<int> OffloadDecision::offload_set() const {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(c.size()); ++k) {
    if (c[k] != 0) out.push_back(k);
  }
  return out;
}

int OffloadDecision::num_offloaders() const {
  return static_cast<int>(std::count_if(c.begin(), c.end(), [](int x) { return x != 0; }));
}

BeamformingSolution BeamformingSolution::empty(int num_devices, std::vector<int> offload_set) {
  BeamformingSolution bf;
  std::sort(offload_set.begin(), offload_set.end());
  bf.offload_set = std::move(offload_set);
  bf.q.resize(num_devices);
  bf.v.resize(num_devices);
  bf.z.resize(num_devices);
  bf.w.assign(num_devices, 0.0);
  bf.rates.assign(num_devices, 0.0);
  return bf;
}

bool BeamformingSolution::is_offloader(int k) const {
  return std::binary_search(offload_set.begin(), offload_set.end(), k);
}

double stream_sinr(const ChannelSet& channels, const BeamformingSolution& bf, int k, int l,
                   bool include_intra) {
  const ComplexVector v = bf.v.at(k).col(l);
  const double vnorm2 = v.squaredNorm();
  if (vnorm2 == 0.0) throw Error(ErrorCode::ZeroReceiveVector, "stream_sinr: zero receive vector");
  const ComplexMatrix& hk = channels.h.at(k);
  const Complex signal = v.dot(hk * bf.q.at(k).col(l));  // v^H H q
  double interference = channels.noise_power * vnorm2;
  for (int i : bf.offload_set) {
    if (i == k) continue;
    const ComplexVector u = channels.h[i].adjoint() * v;  // H_i^H v
    const ComplexMatrix& qi = bf.q[i];
    for (int j = 0; j < qi.cols(); ++j) interference += std::norm(u.dot(qi.col(j)));
  }
  if (include_intra) {
    const ComplexVector u = hk.adjoint() * v;
    const ComplexMatrix& qk = bf.q[k];
    for (int j = 0; j < qk.cols(); ++j) {
      if (j != l) interference += std::norm(u.dot(qk.col(j)));
    }
  }
  return std::norm(signal) / interference;
}

double rate(const ChannelSet& channels, const BeamformingSolution& bf, int k, double bandwidth,
            bool include_intra) {
  double r = 0.0;
  const int d = static_cast<int>(bf.q.at(k).cols());
  for (int l = 0; l < d; ++l) {
    r += bandwidth * std::log2(1.0 + stream_sinr(channels, bf, k, l, include_intra));
  }
  return r;
}

std::vector<double> all_rates(const Scenario& s, const BeamformingSolution& bf) {
  std::vector<double> r(s.num_devices(), 0.0);
  for (int k : bf.offload_set) {
    r[k] = rate(s.channels, bf, k, s.config.bandwidth, s.config.intra_stream_interference);
  }
  return r;
}

LocalCost local_cost(const MobileDevice& device, double alpha, double kappa) {
  const double cycles = alpha * device.task_bits;
  return {kappa * cycles * device.f_loc * device.f_loc, cycles / device.f_loc};
}

LocalCost edge_cost(const MobileDevice& device, double alpha) {
  const double t_c = alpha * device.task_bits / device.f_c;
  return {device.p_idle * t_c, t_c};
}

OffloadCost offload_cost(const Scenario& s, const OffloadDecision& decision,
                         const BeamformingSolution& bf, int k) {
  if (decision.c.at(k) == 0) {
    throw Error(ErrorCode::InvalidArgument, "offload_cost: device is not an offloader");
  }
  double t_tran = 0.0;
  double r_k = 0.0;
  for (int i : decision.offload_set()) {
    const double r = rate(s.channels, bf, i, s.config.bandwidth, s.config.intra_stream_interference);
    if (r <= 0.0) throw Error(ErrorCode::ZeroRate, "offload_cost: offloader with zero rate");
    t_tran = std::max(t_tran, s.devices[i].task_bits / r);
    if (i == k) r_k = r;
  }
  const auto edge = edge_cost(s.devices[k], s.config.alpha);
  const double p_t = bf.q.at(k).squaredNorm();
  return {s.devices[k].task_bits / r_k * p_t + edge.energy, t_tran + edge.delay};
}

CostBreakdown account_costs(const Scenario& s, const std::vector<int>& c,
                            const std::vector<double>& tx_energy,
                            const std::vector<double>& tran_delay) {
  const int kk = s.num_devices();
  const double le = s.config.lambda_e;
  const double lt = s.config.lambda_t;
  CostBreakdown out;
  out.devices.resize(kk);
  out.delta.resize(kk);
  for (int k = 0; k < kk; ++k) {
    const auto& dev = s.devices[k];
    const auto loc = local_cost(dev, s.config.alpha, s.config.kappa);
    const auto edge = edge_cost(dev, s.config.alpha);
    DeviceCost& dc = out.devices[k];
    dc.offload = c.at(k) != 0;
    dc.e_loc = loc.energy;
    dc.t_loc = loc.delay;
    dc.e_c = edge.energy;
    dc.t_c = edge.delay;
    const double local_weighted = le * loc.energy + lt * loc.delay;
    out.delta[k] = le * edge.energy + lt * edge.delay - local_weighted;
    out.eta += local_weighted;
    if (dc.offload) {
      dc.e_tx = tx_energy.at(k);
      dc.t_tran = tran_delay.at(k);
      dc.energy = dc.e_tx + edge.energy;
      dc.delay = dc.t_tran + edge.delay;
      out.zeta += le * edge.energy + lt * edge.delay;
    } else {
      dc.energy = loc.energy;
      dc.delay = loc.delay;
      out.zeta += local_weighted;
    }
    out.weighted_cost += le * dc.energy + lt * dc.delay;
    out.total_energy += dc.energy;
    out.max_delay = std::max(out.max_delay, dc.delay);
    out.mean_delay += dc.delay / kk;
    if (dc.delay > dev.tau_max + 1e-9) out.delay_violations.push_back(k);
  }
  return out;
}

CostBreakdown total_cost(const Scenario& s, const OffloadDecision& decision,
                         const BeamformingSolution& bf) {
  const int kk = s.num_devices();
  if (static_cast<int>(decision.c.size()) != kk || decision.offload_set() != bf.offload_set) {
    throw Error(ErrorCode::InvalidArgument, "total_cost: decision does not match beamforming offload set");
  }
  std::vector<double> tx(kk, 0.0), tran(kk, 0.0);
  const auto rates = all_rates(s, bf);
  double t_tran = 0.0;
  for (int k : bf.offload_set) {
    if (rates[k] <= 0.0) throw Error(ErrorCode::ZeroRate, "total_cost: offloader with zero rate");
    t_tran = std::max(t_tran, s.devices[k].task_bits / rates[k]);
  }
  bool power_ok = true;
  for (int k : bf.offload_set) {
    const double p_t = bf.q[k].squaredNorm();
    tx[k] = s.devices[k].task_bits / rates[k] * p_t;
    tran[k] = t_tran;
    if (p_t > s.devices[k].p_max + 1e-9) power_ok = false;
  }
  auto out = account_costs(s, decision.c, tx, tran);
  out.power_feasible = power_ok;
  return out;
}

double rate_upper_bound(const ComplexMatrix& h, double p_max, int streams, double noise_power,
                        double bandwidth) {
  Eigen::JacobiSVD<ComplexMatrix> svd(h);
  const auto& sv = svd.singularValues();
  double r = 0.0;
  const int used = std::min<int>(streams, static_cast<int>(sv.size()));
  for (int l = 0; l < used; ++l) {
    r += bandwidth * std::log2(1.0 + (p_max / streams) * sv(l) * sv(l) / noise_power);
  }
  return r;
}

double rate_upper_bound(const Scenario& s, int k) {
  return rate_upper_bound(s.channels.h.at(k), s.devices.at(k).p_max, s.config.streams,
                          s.channels.noise_power, s.config.bandwidth);
}

}  // namespace mecoff
