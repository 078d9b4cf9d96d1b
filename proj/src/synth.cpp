#include "fgd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "fgd/rng.hpp"

namespace fgd {

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("synth config: " + msg); };
  if (n_reviewers < 0) fail("n_reviewers must be non-negative");
  if (n_products < 1) fail("n_products must be positive");
  if (reviews_per_reviewer < 1.0) fail("reviews_per_reviewer must be at least 1");
  if (horizon_days < 1) fail("horizon_days must be positive");
  if (rating_noise < 0.0) fail("rating_noise must be non-negative");
  for (const auto& g : planted) {
    if (g.size < 2) fail("planted groups need at least 2 members");
    if (g.target_products < 1) fail("planted groups need at least one target product");
    if (g.target_products > n_products) fail("more target products than products");
    if (g.rating < 1 || g.rating > 5) fail("planted rating outside [1,5]");
    if (g.burst_window_days < 0) fail("burst window must be non-negative");
  }
}

namespace {

std::string numbered(const char* prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
  return buf;
}

/// Standard normal via Box-Muller on the portable uniform.
double normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Knuth's multiplication method; fine for small means.
int poisson(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  int k = 0;
  double p = uniform01(rng);
  while (p > limit) {
    ++k;
    p *= uniform01(rng);
  }
  return k;
}

/// First `count` entries of a partial Fisher-Yates shuffle of [0, n).
std::vector<int> sample_without_replacement(Rng& rng, int n, int count) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<int>(i + uniform_index(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace

SynthDataset synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const Date start = std::chrono::sys_days{std::chrono::year{2013} / 1 / 1};
  const int width = static_cast<int>(std::to_string(std::max({cfg.n_reviewers, cfg.n_products, 1})).size());

  std::vector<std::string> products;
  std::vector<double> quality;
  for (int p = 0; p < cfg.n_products; ++p) {
    products.push_back(numbered("p", p, width));
    quality.push_back(uniform(rng, 2.5, 4.5));
  }

  std::vector<RawReview> rows;
  for (int u = 0; u < cfg.n_reviewers; ++u) {
    const std::string name = numbered("u", u, width);
    const int count = std::min(cfg.n_products, 1 + poisson(rng, cfg.reviews_per_reviewer - 1.0));
    for (int p : sample_without_replacement(rng, cfg.n_products, count)) {
      const double raw = quality[static_cast<std::size_t>(p)] + cfg.rating_noise * normal(rng);
      const int rating = std::clamp(static_cast<int>(std::lround(raw)), 1, 5);
      const Date date = start + std::chrono::days{uniform_index(rng, static_cast<std::uint64_t>(cfg.horizon_days))};
      rows.push_back({name, products[static_cast<std::size_t>(p)], rating, date, Label::Genuine});
    }
  }

  // Targets are drawn without replacement across groups until the catalogue runs out.
  std::vector<int> catalogue;
  std::size_t next_target = 0;
  auto draw_target = [&](const std::vector<int>& taken) {
    while (true) {
      if (next_target == catalogue.size()) {
        catalogue = sample_without_replacement(rng, cfg.n_products, cfg.n_products);
        next_target = 0;
      }
      const int p = catalogue[next_target++];
      if (std::find(taken.begin(), taken.end(), p) == taken.end()) return p;
    }
  };

  SynthDataset data;
  for (std::size_t g = 0; g < cfg.planted.size(); ++g) {
    const auto& spec = cfg.planted[g];
    std::vector<int> targets;
    for (int t = 0; t < spec.target_products; ++t) targets.push_back(draw_target(targets));
    const auto latest_start = static_cast<std::uint64_t>(std::max(cfg.horizon_days - spec.burst_window_days, 1));
    const Date campaign = start + std::chrono::days{uniform_index(rng, latest_start)};

    std::vector<std::string> members;
    for (int m = 0; m < spec.size; ++m) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "f%02zu_%04d", g, m);
      members.emplace_back(buf);
      for (int p : targets) {
        const auto offset = uniform_index(rng, static_cast<std::uint64_t>(spec.burst_window_days) + 1);
        rows.push_back({members.back(), products[static_cast<std::size_t>(p)], spec.rating,
                        campaign + std::chrono::days{offset}, Label::Fake});
      }
    }
    data.groups.push_back(std::move(members));
  }
  data.table = ReviewTable(std::move(rows));
  return data;
}

void write_ground_truth(std::ostream& out, const SynthDataset& data) {
  for (std::size_t g = 0; g < data.groups.size(); ++g) {
    for (const auto& m : data.groups[g]) out << g << '\t' << m << '\n';
  }
}

}  // namespace fgd
