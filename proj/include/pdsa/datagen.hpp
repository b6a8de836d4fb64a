#pragma once

// Random parallelepiped datasets for the keypoint-to-3D regression, with a
// guaranteed share of exactly ambiguous pairs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "pdsa/ambiguity.hpp"
#include "pdsa/error.hpp"
#include "pdsa/rng.hpp"

namespace pdsa {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool valid() const { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; }
};

struct SampleRanges {
  Range ex{-0.3, 0.3};
  Range ey{-0.3, 0.3};
  Range ez{0.1, 0.5};
  Range tz{0.4, 0.8};
  // tx, ty are drawn over the camera frustum at depth tz and then
  // rejection-tested for full visibility.

  void validate() const {
    if (!(ex.valid() && ey.valid() && ez.valid() && tz.valid()))
      throw InputError("sample ranges must be finite and nonempty");
    if (!(ez.lo > 0.0)) throw InputError("extrusion z range must be positive");
    if (!(tz.lo > 0.0)) throw InputError("depth range must be positive");
  }
};

struct PairConfig {
  double fraction = 0.1;  // share of samples that are injected ambiguous partners
  Range offset{0.05, 0.3};  // |dx|, |dy| in meters, signs uniform
};

struct Sample {
  std::size_t idx = 0;
  Keypoints2 kp2d{};
  Keypoints2 kp2d_centered{};
  Keypoints3 kp3d{};
  Vec3 extrusion = Vec3::Zero();
  Vec3 t = Vec3::Zero();
  long pair_id = -1;
};

struct Dataset {
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

inline bool fully_visible(const PinholeCamera& cam, const Keypoints3& k3) {
  for (const auto& p : k3) {
    if (!(p.z() > 0.0)) return false;
    if (!cam.contains(project(cam, p))) return false;
  }
  return true;
}

inline Sample make_sample(const PinholeCamera& cam, const Instance& inst, std::size_t idx,
                          long pair_id) {
  Sample s;
  s.idx = idx;
  s.kp3d = corners_3d(inst);
  s.kp2d = project_corners(cam, s.kp3d);
  s.kp2d_centered = centered(s.kp2d);
  s.extrusion = inst.shape.extrusion;
  s.t = inst.placement.t;
  s.pair_id = pair_id;
  return s;
}

namespace detail {

inline constexpr int kMaxRejections = 10000;

template <class Rng>
double uniform(Rng& rng, Range r) {
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

template <class Rng>
Instance draw_instance(Rng& rng, const PinholeCamera& cam, const SampleRanges& ranges) {
  Instance inst;
  inst.shape.extrusion = Vec3(uniform(rng, ranges.ex), uniform(rng, ranges.ey), uniform(rng, ranges.ez));
  const double tz = uniform(rng, ranges.tz);
  const Range tx{-cam.px * tz / cam.fx, (cam.width - cam.px) * tz / cam.fx};
  const Range ty{-cam.py * tz / cam.fy, (cam.height - cam.py) * tz / cam.fy};
  inst.placement.t = Vec3(uniform(rng, tx), uniform(rng, ty), tz);
  return inst;
}

template <class Rng>
Instance draw_visible(Rng& rng, const PinholeCamera& cam, const SampleRanges& ranges) {
  for (int k = 0; k < kMaxRejections; ++k) {
    Instance inst = draw_instance(rng, cam, ranges);
    if (fully_visible(cam, corners_3d(inst))) return inst;
  }
  throw InputError("sample ranges make full visibility infeasible");
}

template <class Rng>
std::pair<Instance, Instance> draw_visible_pair(Rng& rng, const PinholeCamera& cam,
                                                const SampleRanges& ranges, const PairConfig& pairs) {
  std::bernoulli_distribution coin(0.5);
  for (int k = 0; k < kMaxRejections; ++k) {
    const Instance base = draw_visible(rng, cam, ranges);
    const double dx = uniform(rng, pairs.offset) * (coin(rng) ? 1.0 : -1.0);
    const double dy = uniform(rng, pairs.offset) * (coin(rng) ? 1.0 : -1.0);
    const Instance partner = construct_ambiguous(base, dx, dy);
    if (fully_visible(cam, corners_3d(partner))) return {base, partner};
  }
  throw InputError("no visible ambiguous partner found within the rejection budget");
}

}  // namespace detail

/**
 * Draws n fully visible samples. round(pairs.fraction * n) of them are exact
 * ambiguous partners (construct_ambiguous) of another sample in the set and
 * share its pair_id; partners directly follow their base.
 *
 * Every unit (single or pair) draws from its own (seed, unit) substream.
 */
inline Dataset sample_dataset(const PinholeCamera& cam, const SampleRanges& ranges, std::size_t n,
                              std::uint64_t seed, const PairConfig& pairs = {}) {
  if (n < 1) throw InputError("dataset size must be at least 1");
  cam.validate();
  ranges.validate();
  if (!(pairs.fraction >= 0.0 && pairs.fraction <= 0.5))
    throw InputError("pair fraction must lie in [0, 0.5]");
  if (!(pairs.offset.valid() && pairs.offset.lo >= 0.0)) throw InputError("invalid pair offsets");

  const auto n_pairs = static_cast<std::size_t>(std::llround(pairs.fraction * static_cast<double>(n)));
  const std::size_t n_units = n - n_pairs;

  // Which units are pairs.
  std::vector<char> is_pair(n_units, 0);
  std::fill_n(is_pair.begin(), n_pairs, 1);
  auto layout_rng = substream(seed, "datagen.layout");
  std::shuffle(is_pair.begin(), is_pair.end(), layout_rng);

  Dataset ds;
  ds.samples.reserve(n);
  long next_pair = 0;
  for (std::size_t u = 0; u < n_units; ++u) {
    auto rng = substream(seed, "datagen.unit", u);
    if (is_pair[u]) {
      const auto [base, partner] = detail::draw_visible_pair(rng, cam, ranges, pairs);
      ds.samples.push_back(make_sample(cam, base, ds.size(), next_pair));
      ds.samples.push_back(make_sample(cam, partner, ds.size(), next_pair));
      ++next_pair;
    } else {
      ds.samples.push_back(make_sample(cam, detail::draw_visible(rng, cam, ranges), ds.size(), -1));
    }
  }
  return ds;
}

/**
 * Deterministic shuffle-and-split. Pair members always stay on the same side,
 * so the train share is round(fraction * n) up to one extra sample.
 */
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("split fraction must be in (0, 1)");

  // Units: a single sample or both members of a pair.
  std::vector<std::vector<std::size_t>> units;
  std::vector<long> pair_unit;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const long pid = ds.samples[i].pair_id;
    if (pid < 0) {
      units.push_back({i});
      continue;
    }
    if (static_cast<std::size_t>(pid) >= pair_unit.size()) pair_unit.resize(pid + 1, -1);
    if (pair_unit[pid] < 0) {
      pair_unit[pid] = static_cast<long>(units.size());
      units.push_back({i});
    } else {
      units[pair_unit[pid]].push_back(i);
    }
  }
  auto rng = substream(seed, "datagen.split");
  std::shuffle(units.begin(), units.end(), rng);

  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  std::pair<Dataset, Dataset> out;
  for (const auto& unit : units) {
    Dataset& side = out.first.size() < target ? out.first : out.second;
    for (std::size_t i : unit) side.samples.push_back(ds.samples[i]);
  }
  return out;
}

}  // namespace pdsa
