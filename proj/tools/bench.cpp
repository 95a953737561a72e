// Benchmark of the OpenMP residual/Jacobian kernels against the serial
// execution of the same kernels and the independent complex-arithmetic
// reference. Usage: blackout-bench [case.m] [load_factor] [evals]

#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "blens/case_model.hpp"
#include "blens/circuit.hpp"
#include "blens/kernels.hpp"

namespace {

template <typename Fn>
double timed(const std::string& label, int evals, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  double checksum = 0.0;
  for (int i = 0; i < evals; ++i) checksum += fn(i);
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "  " << label << ": " << dt * 1e3 << " ms total, " << (dt * 1e6 / evals)
            << " us/eval (checksum " << checksum << ")\n";
  return dt;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : std::string(BLENS_DATA_DIR) + "/case30.m";
  const double factor = argc > 2 ? std::stod(argv[2]) : 4.0;
  const int evals = argc > 3 ? std::stoi(argv[3]) : 5000;

  const blens::NetworkCase network = blens::load_matpower_case(path);
  blens::CircuitAssembly assembly = blens::CircuitAssembly::assemble(network, factor);
  const blens::CircuitTopology& topo = assembly.topology();

  std::cout << "case " << network.name << " at factor " << factor << ": " << topo.n_bus
            << " buses, state size " << topo.state_size() << ", " << omp_get_max_threads()
            << " OpenMP thread(s)\n";

  // A deterministic pool of perturbed states and compensation vectors.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dv(-0.1, 0.1);
  std::uniform_real_distribution<double> dn(-0.2, 0.2);
  const int pool = 16;
  std::vector<blens::StateVector> states;
  std::vector<blens::SlackVector> slacks;
  for (int s = 0; s < pool; ++s) {
    blens::StateVector x = assembly.flat_state();
    for (int i = 0; i < x.data.size(); ++i) x.data[i] += dv(rng);
    states.push_back(std::move(x));
    blens::SlackVector n = blens::SlackVector::zero(topo.n_compensable());
    for (int i = 0; i < n.data.size(); ++i) n.data[i] = dn(rng);
    slacks.push_back(std::move(n));
  }

  // Parity between the three routes before timing anything.
  double kernel_spread = 0.0;
  double reference_spread = 0.0;
  for (int s = 0; s < pool; ++s) {
    assembly.set_parallel(true);
    const Eigen::VectorXd par = assembly.residual(states[s], &slacks[s]);
    assembly.set_parallel(false);
    const Eigen::VectorXd ser = assembly.residual(states[s], &slacks[s]);
    const Eigen::VectorXd ref =
        blens::kernels::reference_residual(assembly.network(), states[s], &slacks[s]);
    kernel_spread = std::max(kernel_spread, (par - ser).cwiseAbs().maxCoeff());
    reference_spread = std::max(reference_spread, (par - ref).cwiseAbs().maxCoeff());
  }
  std::cout << "parity: parallel vs serial " << kernel_spread << ", parallel vs reference "
            << reference_spread << "\n";

  std::cout << "residual kernel (" << evals << " evals):\n";
  assembly.set_parallel(true);
  const double res_par = timed("parallel ", evals, [&](int i) {
    return assembly.residual(states[i % pool], &slacks[i % pool]).sum();
  });
  assembly.set_parallel(false);
  const double res_ser = timed("serial   ", evals, [&](int i) {
    return assembly.residual(states[i % pool], &slacks[i % pool]).sum();
  });
  const double res_ref = timed("reference", evals, [&](int i) {
    return blens::kernels::reference_residual(assembly.network(), states[i % pool],
                                              &slacks[i % pool])
        .sum();
  });
  std::cout << "  speedup vs serial " << res_ser / res_par << "x, vs reference "
            << res_ref / res_par << "x\n";

  const int jac_evals = std::max(1, evals / 4);
  std::cout << "jacobian kernel (" << jac_evals << " evals):\n";
  assembly.set_parallel(true);
  const double jac_par =
      timed("parallel ", jac_evals, [&](int i) { return assembly.jacobian(states[i % pool]).sum(); });
  assembly.set_parallel(false);
  const double jac_ser =
      timed("serial   ", jac_evals, [&](int i) { return assembly.jacobian(states[i % pool]).sum(); });
  std::cout << "  speedup vs serial " << jac_ser / jac_par << "x\n";

  assembly.set_parallel(true);
  return 0;
}
