#include "blens/circuit.hpp"

#include <cmath>
#include <complex>
#include <map>

#include "blens/kernels.hpp"
#include "blens/log.hpp"

namespace blens {

namespace {

CircuitTopology build_topology(const NetworkCase& nc) {
  using Complex = std::complex<double>;
  CircuitTopology topo;
  topo.n_bus = static_cast<int>(nc.buses.size());
  topo.slack = nc.slack_index();

  // Accumulate the bus admittance matrix; std::map keeps columns sorted and
  // the diagonal is always materialized so injection partials have a slot.
  std::vector<std::map<int, Complex>> rows(topo.n_bus);
  for (int i = 0; i < topo.n_bus; ++i) rows[i][i] = Complex(0.0, 0.0);
  for (const Branch& br : nc.branches) {
    const int fi = nc.bus_index(br.from);
    const int ti = nc.bus_index(br.to);
    if (br.r == 0.0 && br.x == 0.0) {
      throw SingularAssembly("branch " + std::to_string(br.from) + "-" +
                             std::to_string(br.to) + " has zero impedance");
    }
    const Complex ys = 1.0 / Complex(br.r, br.x);
    const Complex ysh(0.0, br.b_charging / 2.0);
    const Complex a = std::polar(br.tap, br.shift);
    rows[fi][fi] += (ys + ysh) / (br.tap * br.tap);
    rows[fi][ti] += -ys / std::conj(a);
    rows[ti][fi] += -ys / a;
    rows[ti][ti] += ys + ysh;
  }
  for (int i = 0; i < topo.n_bus; ++i) {
    rows[i][i] += Complex(nc.buses[i].shunt_g, nc.buses[i].shunt_b);
  }

  topo.row_ptr.assign(topo.n_bus + 1, 0);
  for (int i = 0; i < topo.n_bus; ++i) {
    topo.row_ptr[i + 1] = topo.row_ptr[i] + static_cast<int>(rows[i].size());
  }
  topo.col_idx.reserve(topo.row_ptr.back());
  topo.g_val.reserve(topo.row_ptr.back());
  topo.b_val.reserve(topo.row_ptr.back());
  for (int i = 0; i < topo.n_bus; ++i) {
    for (const auto& [j, y] : rows[i]) {
      topo.col_idx.push_back(j);
      topo.g_val.push_back(y.real());
      topo.b_val.push_back(y.imag());
    }
  }

  topo.p_load.assign(topo.n_bus, 0.0);
  topo.q_load.assign(topo.n_bus, 0.0);
  topo.p_gen.assign(topo.n_bus, 0.0);
  topo.v_set.assign(topo.n_bus, 1.0);
  topo.comp_of_bus.assign(topo.n_bus, -1);
  topo.pv_slot_of_bus.assign(topo.n_bus, -1);

  for (int i = 0; i < topo.n_bus; ++i) {
    const Bus& b = nc.buses[i];
    topo.p_load[i] = b.p_load;
    topo.q_load[i] = b.q_load;
    topo.v_set[i] = b.v_set;
    if (b.kind == BusKind::PV) {
      topo.pv_slot_of_bus[i] = static_cast<int>(topo.pv_buses.size());
      topo.pv_buses.push_back(i);
    }
    if (i != topo.slack) {
      topo.comp_of_bus[i] = static_cast<int>(topo.comp_bus.size());
      topo.comp_bus.push_back(i);
    }
  }
  topo.n_pv = static_cast<int>(topo.pv_buses.size());

  for (const Generator& g : nc.generators) {
    const int i = nc.bus_index(g.bus);
    switch (nc.buses[i].kind) {
      case BusKind::PQ:
        topo.p_load[i] -= g.p_set;
        topo.q_load[i] -= g.q_set;
        break;
      case BusKind::PV:
        topo.p_gen[i] += g.p_set;
        break;
      case BusKind::Slack:
        break;  // the slack supplies whatever the balance requires
    }
  }

  const Bus& sb = nc.buses[topo.slack];
  topo.slack_e = sb.v_set * std::cos(sb.angle_set);
  topo.slack_f = sb.v_set * std::sin(sb.angle_set);
  return topo;
}

}  // namespace

CircuitAssembly CircuitAssembly::assemble(const NetworkCase& network, double load_factor) {
  CircuitAssembly a;
  a.network_ = (load_factor == 1.0) ? network : scale_loads(network, load_factor);
  a.topo_ = build_topology(a.network_);
  a.pattern_ = kernels::build_jacobian_pattern(a.topo_);
  a.load_factor_ = load_factor;
  BLENS_LOG_DEBUG("assembled case '", network.name, "' at factor ", load_factor, ": ",
                  a.topo_.n_bus, " buses, ", network.branches.size(), " branches, ",
                  a.topo_.n_pv, " PV");
  return a;
}

CircuitAssembly CircuitAssembly::assemble(const Scenario& scenario) {
  // The scenario network already carries its stress scaling (possibly with
  // per-bus weights); the factor is kept as metadata only.
  CircuitAssembly a = assemble(scenario.network, 1.0);
  a.load_factor_ = scenario.load_factor;
  return a;
}

StateVector CircuitAssembly::flat_state() const {
  StateVector x;
  x.n_bus = topo_.n_bus;
  x.n_pv = topo_.n_pv;
  x.data = Eigen::VectorXd::Zero(topo_.state_size());
  for (int i = 0; i < topo_.n_bus; ++i) {
    const Bus& b = network_.buses[i];
    x.e(i) = (b.kind == BusKind::PQ) ? 1.0 : b.v_set;
  }
  x.e(topo_.slack) = topo_.slack_e;
  x.f(topo_.slack) = topo_.slack_f;
  return x;
}

Eigen::VectorXd CircuitAssembly::residual(const StateVector& x, const SlackVector* n) const {
  Eigen::VectorXd out(topo_.residual_size());
  kernels::fill_residual(topo_, x, n, out.data(), parallel_);
  return out;
}

SparseMatrix CircuitAssembly::jacobian(const StateVector& x) const {
  SparseMatrix j = pattern_.skeleton;
  kernels::fill_jacobian_values(topo_, pattern_, x, j.valuePtr(), parallel_);
  return j;
}

SparseMatrix CircuitAssembly::kcl_curvature(const StateVector& x,
                                            const Eigen::VectorXd& beta) const {
  return kernels::residual_curvature(topo_, x, beta, parallel_);
}

}  // namespace blens
