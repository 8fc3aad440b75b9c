#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fsde {

/// Seeded matrix of Brownian increments on a uniform grid, each entry
/// ~ Normal(0, dt). Increment (p, s, c) is a pure function of
/// (seed, p, s, c), never of n_paths or of generation order, so any path is
/// reproducible in isolation (the substream property). Immutable after
/// generation; safe for concurrent reads.
///
/// Increments are stored rather than streamed: the fractional scheme's
/// history term revisits every past increment at every step.
struct BrownianLattice {
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    double dt = 0.0;
    std::size_t noise_dim = 0;
    std::size_t coarsen_factor = 1;  // 1 = generation grid
    std::string generator_id;
    std::vector<double> increments;  // path-major, step, component

    double at(std::size_t path, std::size_t step, std::size_t comp) const {
        return increments[(path * n_steps + step) * noise_dim + comp];
    }
    std::span<const double> path_span(std::size_t path) const {
        return {increments.data() + path * n_steps * noise_dim,
                n_steps * noise_dim};
    }
    double horizon() const { return dt * static_cast<double>(n_steps); }
};

struct GenerateOptions {
    std::size_t memory_cap_bytes = std::size_t{2} << 30;  // 2 GiB default
    int threads = 0;                                      // 0 = auto
};

/// Generates the lattice at the finest grid. Coarser grids for
/// common-random-numbers comparisons are derived by coarsen(), never by
/// regeneration.
BrownianLattice generate(std::uint64_t seed, std::size_t n_paths,
                         std::size_t n_steps, double dt, std::size_t noise_dim,
                         const GenerateOptions& options = {});

/// Sums each group of `factor` consecutive increments into one coarse
/// increment under a fixed canonical order: factor-2 stages while the factor
/// is even, then one left-to-right pass for the odd remainder. The staging
/// makes nesting exact (coarsen(coarsen(L, 2), 2) == coarsen(L, 4)
/// bit-for-bit), which a flat left-to-right pass cannot deliver since
/// floating addition is not associative.
BrownianLattice coarsen(const BrownianLattice& lattice, std::size_t factor);

/// Binary dump: header (magic "FSDEBM01", seed u64, n_paths u64, n_steps u64,
/// dt f64, noise_dim u64), then increments in path-major, step-major,
/// component-minor order. All fields little-endian.
void save_lattice(const BrownianLattice& lattice,
                  const std::filesystem::path& file);
BrownianLattice load_lattice(const std::filesystem::path& file);

}  // namespace fsde
