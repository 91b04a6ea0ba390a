#include "cqed/cavity.hpp"

#include "cqed/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace cqed {

using cd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cd>;
using Trip = Eigen::Triplet<cd>;

namespace {

SpMat identity(int n) {
  SpMat m(n, n);
  m.setIdentity();
  return m;
}

// kron(A, B) * scale appended to triplets, dropping rows listed as skipped.
void kron_into(std::vector<Trip> &out, const SpMat &A, const SpMat &B, cd scale,
               int skip_row) {
  const int nb = static_cast<int>(B.rows());
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(A, ka); ia; ++ia)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(B, kb); ib; ++ib) {
          const int row = static_cast<int>(ia.row()) * nb + static_cast<int>(ib.row());
          if (row == skip_row)
            continue;
          const int col = static_cast<int>(ia.col()) * nb + static_cast<int>(ib.col());
          out.emplace_back(row, col, scale * ia.value() * ib.value());
        }
}

SpMat transpose_of(const SpMat &m) { return SpMat(m.transpose()); }
SpMat conj_of(const SpMat &m) { return m.conjugate(); }
SpMat adjoint_of(const SpMat &m) { return SpMat(m.adjoint()); }

} // namespace

MasterEquationResult transmission_master_equation(const CavitySystem &s,
                                                  const DriveConfig &drive,
                                                  const std::vector<double> &couplings,
                                                  std::size_t fock_cutoff) {
  if (fock_cutoff < 3)
    throw DomainError("fock_cutoff must be at least 3");
  if (couplings.size() > kMaxMasterEquationAtoms)
    throw DomainError("master equation supports at most " +
                      std::to_string(kMaxMasterEquationAtoms) + " atoms");
  if (!drive.atomic_shifts.empty() && drive.atomic_shifts.size() != couplings.size())
    throw DomainError("atomic_shifts must be empty or match the atom count");

  const int nf = static_cast<int>(fock_cutoff);
  const int na = static_cast<int>(couplings.size());
  const int natom = 1 << na;
  const int D = nf * natom;
  // Everything below is in units of kappa.
  const double u = 1.0 / s.kappa;
  const double scale = transition_coupling_scale(drive.transition);

  SpMat a(D, D);
  {
    std::vector<Trip> t;
    for (int n = 1; n < nf; ++n)
      for (int b = 0; b < natom; ++b)
        t.emplace_back((n - 1) * natom + b, n * natom + b, std::sqrt(double(n)));
    a.setFromTriplets(t.begin(), t.end());
  }
  std::vector<SpMat> sig;
  for (int i = 0; i < na; ++i) {
    SpMat m(D, D);
    std::vector<Trip> t;
    for (int n = 0; n < nf; ++n)
      for (int b = 0; b < natom; ++b)
        if (b & (1 << i))
          t.emplace_back(n * natom + (b & ~(1 << i)), n * natom + b, 1.0);
    m.setFromTriplets(t.begin(), t.end());
    sig.push_back(m);
  }

  const SpMat ad = adjoint_of(a);
  SpMat H = -drive.cavity_probe_detuning() * u * (ad * a) + drive.epsilon * u * (a + ad);
  std::vector<double> gs;
  for (int i = 0; i < na; ++i) {
    const double g = couplings[i] * scale;
    gs.push_back(g);
    const SpMat sd = adjoint_of(sig[i]);
    H += -drive.atom_probe_detuning(i) * u * (sd * sig[i]) + g * u * (ad * sig[i] + sd * a);
  }

  std::vector<SpMat> collapse{std::sqrt(2.0) * a};
  for (int i = 0; i < na; ++i)
    collapse.push_back(std::sqrt(2.0 * s.gamma * u) * sig[i]);

  const SpMat I = identity(D);
  const int N = D * D;
  auto assemble = [&](int skip) {
    std::vector<Trip> t;
    kron_into(t, I, H, cd(0, -1), skip);
    kron_into(t, transpose_of(H), I, cd(0, 1), skip);
    for (const auto &C : collapse) {
      const SpMat CdC = adjoint_of(C) * C;
      kron_into(t, conj_of(C), C, 1.0, skip);
      kron_into(t, I, CdC, -0.5, skip);
      kron_into(t, transpose_of(CdC), I, -0.5, skip);
    }
    return t;
  };

  auto trips = assemble(0);
  for (int i = 0; i < D; ++i)
    trips.emplace_back(0, i * D + i, 1.0);
  SpMat L(N, N);
  L.setFromTriplets(trips.begin(), trips.end());
  L.makeCompressed();

  Eigen::SparseLU<SpMat> lu;
  lu.compute(L);
  if (lu.info() != Eigen::Success)
    throw NumericalError("Liouvillian factorization failed", 0.0);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);
  rhs(0) = 1.0;
  const Eigen::VectorXcd x = lu.solve(rhs);

  auto full = assemble(-1);
  SpMat Lfull(N, N);
  Lfull.setFromTriplets(full.begin(), full.end());
  const double residual = (Lfull * x).cwiseAbs().maxCoeff();

  Eigen::Map<const Eigen::MatrixXcd> rho(x.data(), D, D);
  MasterEquationResult r;
  auto &dg = r.diagnostics;
  dg.dimension = static_cast<std::size_t>(D);
  dg.residual = residual;
  dg.trace_error = std::abs(rho.trace() - 1.0);
  dg.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  dg.min_diagonal = rho.diagonal().real().minCoeff();
  if (!(residual < kDensityTolerance))
    throw NumericalError("steady state does not satisfy L rho = 0", residual);
  if (dg.trace_error > kDensityTolerance || dg.hermiticity_error > kDensityTolerance ||
      dg.min_diagonal < -kDensityTolerance)
    throw NumericalError("steady state is not a valid density operator",
                         std::max({dg.trace_error, dg.hermiticity_error, -dg.min_diagonal}));

  r.photon_distribution.assign(nf, 0.0);
  for (int n = 0; n < nf; ++n)
    for (int b = 0; b < natom; ++b)
      r.photon_distribution[n] += rho(n * natom + b, n * natom + b).real();
  r.excited_populations.assign(na, 0.0);
  for (int k = 0; k < D; ++k)
    for (int i = 0; i < na; ++i)
      if ((k % natom) & (1 << i))
        r.excited_populations[i] += rho(k, k).real();
  dg.top_fock_population = r.photon_distribution.back();
  if (dg.top_fock_population > kTopFockTolerance)
    throw CutoffError("Fock cutoff " + std::to_string(fock_cutoff) +
                          " too small: top-level population " +
                          std::to_string(dg.top_fock_population),
                      dg.top_fock_population);

  cd amp = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it)
      amp += it.value() * rho(it.col(), it.row()); // Tr(a rho) = sum a_ij rho_ji
  r.amplitude = amp;
  r.mbar = std::norm(amp);
  r.flux = 2.0 * s.kappa * r.mbar;
  r.couplings = gs;
  return r;
}

MasterEquationResult transmission_master_equation_adaptive(
    const CavitySystem &system, const DriveConfig &drive,
    const std::vector<double> &couplings, std::size_t max_cutoff) {
  const double m = empty_cavity_mbar(system, drive);
  auto cutoff = static_cast<std::size_t>(std::ceil(m + 6.0 * std::sqrt(m) + 6.0));
  cutoff = std::clamp<std::size_t>(cutoff, 6, max_cutoff);
  for (;;) {
    try {
      return transmission_master_equation(system, drive, couplings, cutoff);
    } catch (const CutoffError &) {
      if (cutoff >= max_cutoff)
        throw;
      cutoff = std::min(max_cutoff, cutoff + std::max<std::size_t>(2, cutoff / 2));
    }
  }
}

} // namespace cqed
