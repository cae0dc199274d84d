#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "qpnls/trajectories.hpp"

namespace qpnls {

/// Separable periodic discretization of the box prod_j [-L_j, L_j) with N_j points
/// per direction.  Spatial lattice x_i = -L + i*dx, dx = 2L/N; frequency lattice
/// xi in (pi/L)*{-N/2, ..., N/2-1}, stored in FFT bin order (0..N/2-1, -N/2..-1).
/// Arrays are row-major: the last direction is contiguous.
class Grid {
 public:
  Grid(std::vector<int> points, std::vector<double> extents);

  int n() const { return static_cast<int>(points_.size()); }
  int points(int j) const { return points_[j]; }
  double extent(int j) const { return extents_[j]; }
  double spacing(int j) const { return spacings_[j]; }
  std::size_t size() const { return size_; }
  double cell_volume() const { return cell_volume_; }
  std::size_t stride(int j) const { return strides_[j]; }

  const std::vector<double>& coordinates(int j) const { return coords_[j]; }
  const std::vector<double>& frequencies(int j) const { return freqs_[j]; }
  double max_frequency(int j) const { return M_PI / spacings_[j]; }

  bool same_layout(const Grid& other) const;

 private:
  std::vector<int> points_;
  std::vector<double> extents_;
  std::vector<double> spacings_;
  std::vector<std::vector<double>> coords_;
  std::vector<std::vector<double>> freqs_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  double cell_volume_ = 1.0;
};

/// Complex amplitude field on a shared Grid.
struct WaveFunction {
  std::shared_ptr<const Grid> grid;
  std::vector<std::complex<double>> amp;

  WaveFunction() = default;
  explicit WaveFunction(std::shared_ptr<const Grid> g)
      : grid(std::move(g)), amp(grid->size(), std::complex<double>(0.0, 0.0)) {}

  bool finite() const;
};

/// A * prod_j exp(-(x_j-c_j)^2/(2 w_j^2)) * exp(i k_j x_j).
WaveFunction make_gaussian(std::shared_ptr<const Grid> grid, double amplitude,
                           const std::vector<double>& center,
                           const std::vector<double>& width,
                           const std::vector<double>& momentum);

/// Normalized harmonic-oscillator eigenstate prod_j psi_{m_j}(x_j) for the confining
/// frequencies of `spec` (every direction must have delta=+1).
WaveFunction make_hermite(std::shared_ptr<const Grid> grid, const PotentialSpec& spec,
                          const std::vector<int>& index);

/// (sum |u|^p * volume)^(1/p); p = infinity gives the max modulus.
double lp_norm(const WaveFunction& psi, double p);

/// ||u||_{L^2}^2 (the conserved mass).
double mass(const WaveFunction& psi);

/// || grad u ||_{L^2}, computed spectrally.
double grad_norm(const WaveFunction& psi);

/// || x u ||_{L^2} = || |x| u ||_{L^2}.
double moment_norm(const WaveFunction& psi);

/// lp_norm(.,2) + grad_norm + moment_norm.
double sigma_norm(const WaveFunction& psi);

/// Mass contained in the outermost `cells` grid shells of any direction.
double boundary_mass(const WaveFunction& psi, int cells);

/// Per-axis mass-quantile support radii of psi:
/// spatial[j] = smallest radius such that the bins beyond it carry at most
/// tail_fraction of the squared-amplitude mass; spectral[j] = same for |xi_j|
/// on the Fourier side.
struct SupportRadii {
  std::vector<double> spatial;
  std::vector<double> spectral;
};
SupportRadii measure_support(const WaveFunction& psi, double tail_fraction = 1e-9);

/// Binary snapshot (little-endian, self-describing header + complex payload) plus a
/// JSON metadata sidecar at path + ".json".
void save_wavefunction(const WaveFunction& psi, const std::string& path);
WaveFunction load_wavefunction(const std::string& path);

}  // namespace qpnls
