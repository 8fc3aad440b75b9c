#include "fsde/brownian.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fsde/errors.hpp"
#include "fsde/parallel.hpp"
#include "fsde/rng.hpp"

namespace fsde {

static_assert(std::endian::native == std::endian::little,
              "lattice dump format assumes a little-endian host");

BrownianLattice generate(std::uint64_t seed, std::size_t n_paths,
                         std::size_t n_steps, double dt, std::size_t noise_dim,
                         const GenerateOptions& options) {
    if (n_steps < 1)
        throw std::domain_error("brownian::generate: n_steps must be >= 1");
    if (!(dt > 0.0))
        throw std::domain_error("brownian::generate: dt must be positive");
    if (noise_dim < 1)
        throw std::domain_error("brownian::generate: noise_dim must be >= 1");

    const std::size_t total = n_paths * n_steps * noise_dim;
    if (total * sizeof(double) > options.memory_cap_bytes) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "brownian::generate: %zu paths x %zu steps x %zu "
                      "components = %zu bytes exceeds the %zu-byte cap",
                      n_paths, n_steps, noise_dim, total * sizeof(double),
                      options.memory_cap_bytes);
        throw CapacityError(buf);
    }

    BrownianLattice lattice;
    lattice.seed = seed;
    lattice.n_paths = n_paths;
    lattice.n_steps = n_steps;
    lattice.dt = dt;
    lattice.noise_dim = noise_dim;
    lattice.generator_id = kGeneratorId;
    lattice.increments.resize(total);

    const double sqrt_dt = std::sqrt(dt);
    double* data = lattice.increments.data();
    parallel_for(n_paths, options.threads,
                 [&](std::size_t begin, std::size_t end) {
                     for (std::size_t p = begin; p < end; ++p) {
                         double* row = data + p * n_steps * noise_dim;
                         for (std::size_t s = 0; s < n_steps; ++s)
                             for (std::size_t c = 0; c < noise_dim; ++c)
                                 row[s * noise_dim + c] =
                                     sqrt_dt * rng::counter_normal(seed, p, s, c);
                     }
                 });
    return lattice;
}

namespace {

// One coarsening stage: left-to-right sums of `factor` consecutive
// increments.
BrownianLattice coarsen_stage(const BrownianLattice& lattice,
                              std::size_t factor) {
    BrownianLattice coarse;
    coarse.seed = lattice.seed;
    coarse.n_paths = lattice.n_paths;
    coarse.n_steps = lattice.n_steps / factor;
    coarse.dt = lattice.dt * static_cast<double>(factor);
    coarse.noise_dim = lattice.noise_dim;
    coarse.coarsen_factor = lattice.coarsen_factor * factor;
    coarse.generator_id = lattice.generator_id;
    coarse.increments.assign(coarse.n_paths * coarse.n_steps * coarse.noise_dim,
                             0.0);

    const std::size_t m = lattice.noise_dim;
    for (std::size_t p = 0; p < lattice.n_paths; ++p) {
        const double* fine = lattice.increments.data() + p * lattice.n_steps * m;
        double* out = coarse.increments.data() + p * coarse.n_steps * m;
        for (std::size_t s = 0; s < coarse.n_steps; ++s)
            for (std::size_t k = 0; k < factor; ++k)
                for (std::size_t c = 0; c < m; ++c)
                    out[s * m + c] += fine[(s * factor + k) * m + c];
    }
    return coarse;
}

}  // namespace

BrownianLattice coarsen(const BrownianLattice& lattice, std::size_t factor) {
    if (factor < 1)
        throw std::domain_error("brownian::coarsen: factor must be >= 1");
    if (factor == 1) return lattice;
    if (lattice.n_steps % factor != 0) {
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "brownian::coarsen: factor %zu does not divide %zu steps",
                      factor, lattice.n_steps);
        throw std::domain_error(buf);
    }
    // canonical staging: halve while even, then one pass for the odd
    // remainder. Floating addition is not associative, so a single flat pass
    // for factor 4 would not reproduce two factor-2 passes bit-for-bit; the
    // staged form makes coarsen(coarsen(L,2),2) == coarsen(L,4) exact.
    BrownianLattice current = lattice;
    std::size_t remaining = factor;
    while (remaining % 2 == 0) {
        current = coarsen_stage(current, 2);
        remaining /= 2;
    }
    if (remaining > 1) current = coarsen_stage(current, remaining);
    return current;
}

namespace {

constexpr char kMagic[8] = {'F', 'S', 'D', 'E', 'B', 'M', '0', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

void save_lattice(const BrownianLattice& lattice,
                  const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_lattice: cannot open " + file.string());
    os.write(kMagic, sizeof(kMagic));
    write_u64(os, lattice.seed);
    write_u64(os, lattice.n_paths);
    write_u64(os, lattice.n_steps);
    os.write(reinterpret_cast<const char*>(&lattice.dt), sizeof(double));
    write_u64(os, lattice.noise_dim);
    os.write(reinterpret_cast<const char*>(lattice.increments.data()),
             static_cast<std::streamsize>(lattice.increments.size() *
                                          sizeof(double)));
    if (!os)
        throw std::runtime_error("save_lattice: short write to " + file.string());
}

BrownianLattice load_lattice(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is)
        throw std::runtime_error("load_lattice: cannot open " + file.string());
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_lattice: bad magic in " + file.string());

    BrownianLattice lattice;
    lattice.seed = read_u64(is);
    lattice.n_paths = read_u64(is);
    lattice.n_steps = read_u64(is);
    is.read(reinterpret_cast<char*>(&lattice.dt), sizeof(double));
    lattice.noise_dim = read_u64(is);
    lattice.generator_id = kGeneratorId;
    lattice.increments.resize(lattice.n_paths * lattice.n_steps *
                              lattice.noise_dim);
    is.read(reinterpret_cast<char*>(lattice.increments.data()),
            static_cast<std::streamsize>(lattice.increments.size() *
                                         sizeof(double)));
    if (!is)
        throw std::runtime_error("load_lattice: truncated file " + file.string());
    return lattice;
}

}  // namespace fsde
