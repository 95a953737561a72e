#include "blens/kernels.hpp"

#include <algorithm>
#include <complex>
#include <vector>

#include <Eigen/SparseCore>

#include "blens/errors.hpp"

namespace blens {
namespace kernels {

namespace {

/// Lower bound on |V|^2 used to keep residual evaluation finite at states
/// the line search walks through; the Jacobian rejects such states outright.
constexpr double kMagnitudeGuard = 1e-24;
constexpr double kCollapseMagnitude = 1e-6;

struct InjectionPartials {
  double d_re_de, d_re_df, d_im_de, d_im_df;
};

/// Partials of conj((P + jQ)/V) with respect to e and f at D = |V|^2.
InjectionPartials injection_partials(double p, double q, double e, double f, double d) {
  const double a_re = p * e + q * f;
  const double a_im = p * f - q * e;
  const double d2 = d * d;
  return {p / d - a_re * 2.0 * e / d2, q / d - a_re * 2.0 * f / d2,
          -q / d - a_im * 2.0 * e / d2, p / d - a_im * 2.0 * f / d2};
}

struct InjectionSecond {
  double re_ee, re_ef, re_ff, im_ee, im_ef, im_ff;
};

/// Second partials of conj((P + jQ)/V) with respect to e and f at D = |V|^2.
InjectionSecond injection_second(double p, double q, double e, double f, double d) {
  const double d2 = d * d;
  const double d3 = d2 * d;
  const double a_re = p * e + q * f;
  const double a_im = p * f - q * e;
  InjectionSecond s;
  s.re_ee = -4.0 * e * p / d2 - 2.0 * a_re / d2 + 8.0 * e * e * a_re / d3;
  s.re_ef = -2.0 * f * p / d2 - 2.0 * e * q / d2 + 8.0 * e * f * a_re / d3;
  s.re_ff = -4.0 * f * q / d2 - 2.0 * a_re / d2 + 8.0 * f * f * a_re / d3;
  s.im_ee = 4.0 * e * q / d2 - 2.0 * a_im / d2 + 8.0 * e * e * a_im / d3;
  s.im_ef = 2.0 * f * q / d2 - 2.0 * e * p / d2 + 8.0 * e * f * a_im / d3;
  s.im_ff = -4.0 * f * p / d2 - 2.0 * a_im / d2 + 8.0 * f * f * a_im / d3;
  return s;
}

}  // namespace

void fill_residual(const CircuitTopology& topo, const StateVector& x,
                   const SlackVector* n, double* out, bool parallel) {
  const int n_comp = topo.n_compensable();

#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 0; k < n_comp; ++k) {
    const int i = topo.comp_bus[k];
    const double e_i = x.e(i);
    const double f_i = x.f(i);

    double acc_re = 0.0;
    double acc_im = 0.0;
    for (int t = topo.row_ptr[i]; t < topo.row_ptr[i + 1]; ++t) {
      const int j = topo.col_idx[t];
      const double g = topo.g_val[t];
      const double b = topo.b_val[t];
      acc_re += g * x.e(j) - b * x.f(j);
      acc_im += b * x.e(j) + g * x.f(j);
    }

    const double d = std::max(e_i * e_i + f_i * f_i, kMagnitudeGuard);
    double p = topo.p_load[i];
    double q = topo.q_load[i];
    acc_re += (p * e_i + q * f_i) / d;
    acc_im += (p * f_i - q * e_i) / d;

    const int pv = topo.pv_slot_of_bus[i];
    if (pv >= 0) {
      p = topo.p_gen[i];
      q = x.q(pv);
      acc_re -= (p * e_i + q * f_i) / d;
      acc_im -= (p * f_i - q * e_i) / d;
    }

    if (n != nullptr) {
      acc_re += n->n_re(k);
      acc_im += n->n_im(k);
    }
    out[2 * k] = acc_re;
    out[2 * k + 1] = acc_im;
  }

  const int kcl = topo.kcl_rows();
  for (int j = 0; j < topo.n_pv; ++j) {
    const int i = topo.pv_buses[j];
    const double e_i = x.e(i);
    const double f_i = x.f(i);
    out[kcl + j] = e_i * e_i + f_i * f_i - topo.v_set[i] * topo.v_set[i];
  }
  out[kcl + topo.n_pv] = x.e(topo.slack) - topo.slack_e;
  out[kcl + topo.n_pv + 1] = x.f(topo.slack) - topo.slack_f;
}

JacobianPattern build_jacobian_pattern(const CircuitTopology& topo) {
  JacobianPattern pattern;
  const int n_comp = topo.n_compensable();
  const int kcl = topo.kcl_rows();
  const int n = topo.n_bus;

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::pair<int, int>> slots;  // (row, col) per evaluation slot
  pattern.bus_slot_begin.assign(n_comp + 1, 0);

  for (int k = 0; k < n_comp; ++k) {
    pattern.bus_slot_begin[k] = static_cast<int>(slots.size());
    const int i = topo.comp_bus[k];
    const int row_re = 2 * k;
    const int row_im = 2 * k + 1;
    for (int t = topo.row_ptr[i]; t < topo.row_ptr[i + 1]; ++t) {
      const int j = topo.col_idx[t];
      slots.emplace_back(row_re, j);
      slots.emplace_back(row_re, n + j);
      slots.emplace_back(row_im, j);
      slots.emplace_back(row_im, n + j);
    }
    const int pv = topo.pv_slot_of_bus[i];
    if (pv >= 0) {
      slots.emplace_back(row_re, 2 * n + pv);
      slots.emplace_back(row_im, 2 * n + pv);
    }
  }
  pattern.bus_slot_begin[n_comp] = static_cast<int>(slots.size());
  pattern.kcl_slots = static_cast<int>(slots.size());

  for (int j = 0; j < topo.n_pv; ++j) {
    const int i = topo.pv_buses[j];
    slots.emplace_back(kcl + j, i);
    slots.emplace_back(kcl + j, n + i);
  }
  slots.emplace_back(kcl + topo.n_pv, topo.slack);
  slots.emplace_back(kcl + topo.n_pv + 1, n + topo.slack);
  pattern.total_slots = static_cast<int>(slots.size());

  triplets.reserve(slots.size());
  for (const auto& [row, col] : slots) triplets.emplace_back(row, col, 0.0);
  pattern.skeleton.resize(topo.residual_size(), topo.state_size());
  pattern.skeleton.setFromTriplets(triplets.begin(), triplets.end());
  pattern.skeleton.makeCompressed();

  pattern.slot_to_csc.resize(slots.size());
  const int* outer = pattern.skeleton.outerIndexPtr();
  const int* inner = pattern.skeleton.innerIndexPtr();
  for (size_t s = 0; s < slots.size(); ++s) {
    const auto [row, col] = slots[s];
    const int* begin = inner + outer[col];
    const int* end = inner + outer[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    pattern.slot_to_csc[s] = static_cast<int>(outer[col] + (it - begin));
  }
  return pattern;
}

void fill_jacobian_values(const CircuitTopology& topo, const JacobianPattern& pattern,
                          const StateVector& x, double* csc_values, bool parallel) {
  for (int i = 0; i < topo.n_bus; ++i) {
    if (x.v_mag(i) < kCollapseMagnitude) {
      throw VoltageCollapsePoint("voltage magnitude at bus position " + std::to_string(i) +
                                 " fell below 1e-6 during Jacobian evaluation");
    }
  }

  const int n_comp = topo.n_compensable();

#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 0; k < n_comp; ++k) {
    const int i = topo.comp_bus[k];
    const double e_i = x.e(i);
    const double f_i = x.f(i);
    const double d = e_i * e_i + f_i * f_i;

    InjectionPartials load = injection_partials(topo.p_load[i], topo.q_load[i], e_i, f_i, d);
    const int pv = topo.pv_slot_of_bus[i];
    if (pv >= 0) {
      const InjectionPartials gen =
          injection_partials(topo.p_gen[i], x.q(pv), e_i, f_i, d);
      load.d_re_de -= gen.d_re_de;
      load.d_re_df -= gen.d_re_df;
      load.d_im_de -= gen.d_im_de;
      load.d_im_df -= gen.d_im_df;
    }

    int slot = pattern.bus_slot_begin[k];
    for (int t = topo.row_ptr[i]; t < topo.row_ptr[i + 1]; ++t) {
      const int j = topo.col_idx[t];
      const double g = topo.g_val[t];
      const double b = topo.b_val[t];
      const bool diag = (j == i);
      csc_values[pattern.slot_to_csc[slot++]] = g + (diag ? load.d_re_de : 0.0);
      csc_values[pattern.slot_to_csc[slot++]] = -b + (diag ? load.d_re_df : 0.0);
      csc_values[pattern.slot_to_csc[slot++]] = b + (diag ? load.d_im_de : 0.0);
      csc_values[pattern.slot_to_csc[slot++]] = g + (diag ? load.d_im_df : 0.0);
    }
    if (pv >= 0) {
      csc_values[pattern.slot_to_csc[slot++]] = -f_i / d;
      csc_values[pattern.slot_to_csc[slot++]] = e_i / d;
    }
  }

  int slot = pattern.kcl_slots;
  for (int j = 0; j < topo.n_pv; ++j) {
    const int i = topo.pv_buses[j];
    csc_values[pattern.slot_to_csc[slot++]] = 2.0 * x.e(i);
    csc_values[pattern.slot_to_csc[slot++]] = 2.0 * x.f(i);
  }
  csc_values[pattern.slot_to_csc[slot++]] = 1.0;
  csc_values[pattern.slot_to_csc[slot++]] = 1.0;
}

SparseMatrix residual_curvature(const CircuitTopology& topo, const StateVector& x,
                                const Eigen::VectorXd& beta, bool parallel) {
  const int n_comp = topo.n_compensable();
  if (beta.size() != topo.kcl_rows()) {
    throw Error("curvature weight vector does not match the KCL rows");
  }

  // Each compensable bus owns a disjoint slot range: a symmetric (e, f)
  // block of four entries, plus four more for the q couplings on PV buses.
  std::vector<int> offset(n_comp + 1, 0);
  for (int k = 0; k < n_comp; ++k) {
    const int i = topo.comp_bus[k];
    offset[k + 1] = offset[k] + (topo.pv_slot_of_bus[i] >= 0 ? 8 : 4);
  }
  std::vector<Eigen::Triplet<double>> trip(offset[n_comp]);
  const int nb = topo.n_bus;

#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 0; k < n_comp; ++k) {
    const int i = topo.comp_bus[k];
    const double e_i = x.e(i);
    const double f_i = x.f(i);
    const double d = std::max(e_i * e_i + f_i * f_i, kMagnitudeGuard);
    const double b_re = beta[2 * k];
    const double b_im = beta[2 * k + 1];

    InjectionSecond load =
        injection_second(topo.p_load[i], topo.q_load[i], e_i, f_i, d);
    const int pv = topo.pv_slot_of_bus[i];
    if (pv >= 0) {
      const InjectionSecond gen =
          injection_second(topo.p_gen[i], x.q(pv), e_i, f_i, d);
      load.re_ee -= gen.re_ee;
      load.re_ef -= gen.re_ef;
      load.re_ff -= gen.re_ff;
      load.im_ee -= gen.im_ee;
      load.im_ef -= gen.im_ef;
      load.im_ff -= gen.im_ff;
    }

    const double c_ee = b_re * load.re_ee + b_im * load.im_ee;
    const double c_ef = b_re * load.re_ef + b_im * load.im_ef;
    const double c_ff = b_re * load.re_ff + b_im * load.im_ff;

    int slot = offset[k];
    trip[slot++] = {i, i, c_ee};
    trip[slot++] = {i, nb + i, c_ef};
    trip[slot++] = {nb + i, i, c_ef};
    trip[slot++] = {nb + i, nb + i, c_ff};

    if (pv >= 0) {
      // Mixed partials with respect to the reactive state q. Only the
      // generator term depends on q, and it enters with a minus sign.
      const double d2 = d * d;
      const double re_eq = -2.0 * e_i * f_i / d2;
      const double re_fq = 1.0 / d - 2.0 * f_i * f_i / d2;
      const double im_eq = -1.0 / d + 2.0 * e_i * e_i / d2;
      const double im_fq = 2.0 * e_i * f_i / d2;
      const double c_eq = -(b_re * re_eq + b_im * im_eq);
      const double c_fq = -(b_re * re_fq + b_im * im_fq);
      const int qi = 2 * nb + pv;
      trip[slot++] = {i, qi, c_eq};
      trip[slot++] = {qi, i, c_eq};
      trip[slot++] = {nb + i, qi, c_fq};
      trip[slot++] = {qi, nb + i, c_fq};
    }
  }

  SparseMatrix c(topo.state_size(), topo.state_size());
  c.setFromTriplets(trip.begin(), trip.end());
  return c;
}

Eigen::VectorXd reference_residual(const NetworkCase& network, const StateVector& x,
                                   const SlackVector* n) {
  using Complex = std::complex<double>;
  const int nb = static_cast<int>(network.buses.size());
  const int slack = network.slack_index();

  std::vector<std::vector<Complex>> y(nb, std::vector<Complex>(nb, Complex(0.0, 0.0)));
  for (const Branch& br : network.branches) {
    const int fi = network.bus_index(br.from);
    const int ti = network.bus_index(br.to);
    const Complex z(br.r, br.x);
    if (std::abs(z) == 0.0) throw SingularAssembly("zero impedance branch");
    const Complex ys = 1.0 / z;
    const Complex ysh(0.0, br.b_charging / 2.0);
    const Complex a = std::polar(br.tap, br.shift);
    y[fi][fi] += (ys + ysh) / (br.tap * br.tap);
    y[fi][ti] += -ys / std::conj(a);
    y[ti][fi] += -ys / a;
    y[ti][ti] += ys + ysh;
  }
  for (int i = 0; i < nb; ++i) {
    y[i][i] += Complex(network.buses[i].shunt_g, network.buses[i].shunt_b);
  }

  std::vector<Complex> s_load(nb, Complex(0.0, 0.0));
  std::vector<Complex> s_gen(nb, Complex(0.0, 0.0));
  for (int i = 0; i < nb; ++i) {
    s_load[i] = Complex(network.buses[i].p_load, network.buses[i].q_load);
  }
  std::vector<int> pv_buses;
  for (int i = 0; i < nb; ++i) {
    if (network.buses[i].kind == BusKind::PV) pv_buses.push_back(i);
  }
  for (const Generator& g : network.generators) {
    const int i = network.bus_index(g.bus);
    switch (network.buses[i].kind) {
      case BusKind::PQ:
        s_load[i] -= Complex(g.p_set, g.q_set);
        break;
      case BusKind::PV:
        s_gen[i] += Complex(g.p_set, 0.0);
        break;
      case BusKind::Slack:
        break;
    }
  }
  for (size_t j = 0; j < pv_buses.size(); ++j) {
    s_gen[pv_buses[j]] += Complex(0.0, x.q(static_cast<int>(j)));
  }

  std::vector<Complex> v(nb);
  for (int i = 0; i < nb; ++i) v[i] = Complex(x.e(i), x.f(i));

  Eigen::VectorXd out(2 * (nb - 1) + static_cast<int>(pv_buses.size()) + 2);
  int k = 0;
  for (int i = 0; i < nb; ++i) {
    if (i == slack) continue;
    Complex inj(0.0, 0.0);
    for (int j = 0; j < nb; ++j) inj += y[i][j] * v[j];
    Complex g = inj + std::conj(s_load[i] / v[i]) - std::conj(s_gen[i] / v[i]);
    if (n != nullptr) g += Complex(n->n_re(k), n->n_im(k));
    out[2 * k] = g.real();
    out[2 * k + 1] = g.imag();
    ++k;
  }
  const int kcl = 2 * (nb - 1);
  for (size_t j = 0; j < pv_buses.size(); ++j) {
    const int i = pv_buses[j];
    out[kcl + static_cast<int>(j)] = std::norm(v[i]) - network.buses[i].v_set * network.buses[i].v_set;
  }
  const Bus& sb = network.buses[slack];
  const Complex v_ref = std::polar(sb.v_set, sb.angle_set);
  out[kcl + static_cast<int>(pv_buses.size())] = (v[slack] - v_ref).real();
  out[kcl + static_cast<int>(pv_buses.size()) + 1] = (v[slack] - v_ref).imag();
  return out;
}

}  // namespace kernels
}  // namespace blens
