#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tgnn/core.hpp"
#include "tgnn/rng.hpp"

namespace tgnn {

// Index-based split of a dataset. The four lists are pairwise disjoint and
// cover every graph. Graphs in unlabeled_train are treated as label-free
// during training even when a label is stored (labels are kept for analysis).
struct SplitDataset {
  std::vector<int> labeled_train;
  std::vector<int> unlabeled_train;
  std::vector<int> validation;
  std::vector<int> test;
  std::uint64_t seed = 0;
};

// Stratified random split with proportions ratios / sum(ratios) per class;
// per-class remainders go to unlabeled_train. Deterministic for a fixed seed.
inline SplitDataset split_dataset(const Dataset& ds, std::array<int, 4> ratios, std::uint64_t seed) {
  for (int r : ratios)
    if (r <= 0) throw std::invalid_argument("split: ratios must be positive");
  const int total_ratio = std::accumulate(ratios.begin(), ratios.end(), 0);

  SplitDataset split;
  split.seed = seed;
  Rng rng = make_rng(seed, 0x59117);

  std::vector<std::vector<int>> by_class(std::max(ds.num_classes, 1));
  for (size_t i = 0; i < ds.graphs.size(); ++i) {
    if (ds.graphs[i].label)
      by_class[*ds.graphs[i].label].push_back(static_cast<int>(i));
    else
      split.unlabeled_train.push_back(static_cast<int>(i));  // unlabeled input data
  }

  for (int c = 0; c < static_cast<int>(by_class.size()); ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    std::shuffle(idx.begin(), idx.end(), rng);
    const int n = static_cast<int>(idx.size());
    std::array<int, 4> counts;
    int assigned = 0;
    for (int part = 0; part < 4; ++part) {
      counts[part] = n * ratios[part] / total_ratio;
      assigned += counts[part];
    }
    counts[1] += n - assigned;  // remainder to unlabeled_train
    if (counts[0] == 0) {
      // the supervised loss needs every class present in the labeled split
      int donor = 1;
      for (int part = 2; part < 4; ++part)
        if (counts[part] > counts[donor]) donor = part;
      if (counts[donor] == 0) throw std::invalid_argument("split: class too small for a labeled example");
      --counts[donor];
      ++counts[0];
    }
    int pos = 0;
    std::vector<int>* parts[4] = {&split.labeled_train, &split.unlabeled_train, &split.validation,
                                  &split.test};
    for (int part = 0; part < 4; ++part)
      for (int k = 0; k < counts[part]; ++k) parts[part]->push_back(idx[pos++]);
  }

  std::sort(split.labeled_train.begin(), split.labeled_train.end());
  std::sort(split.unlabeled_train.begin(), split.unlabeled_train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

// Shrinks the labeled split to round(ratio * size), largest-remainder over
// classes, and moves the dropped graphs into unlabeled_train.
inline void apply_label_ratio(SplitDataset& split, const Dataset& ds, double ratio,
                              std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("label_ratio must be in (0, 1]");
  if (ratio == 1.0) return;
  const int total = static_cast<int>(split.labeled_train.size());
  const int keep_total = std::max(1, static_cast<int>(std::llround(ratio * total)));

  std::vector<std::vector<int>> by_class(ds.num_classes);
  for (int idx : split.labeled_train) by_class[*ds.graphs[idx].label].push_back(idx);

  std::vector<double> exact(ds.num_classes, 0.0);
  std::vector<int> keep(ds.num_classes, 0);
  int assigned = 0;
  for (int c = 0; c < ds.num_classes; ++c) {
    exact[c] = static_cast<double>(keep_total) * by_class[c].size() / total;
    keep[c] = static_cast<int>(exact[c]);
    assigned += keep[c];
  }
  std::vector<int> order(ds.num_classes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return exact[a] - keep[a] > exact[b] - keep[b];
  });
  for (int i = 0; assigned < keep_total; ++i) {
    ++keep[order[i % ds.num_classes]];
    ++assigned;
  }
  for (int c = 0; c < ds.num_classes; ++c) {
    if (by_class[c].empty()) continue;
    if (keep[c] == 0)
      throw std::invalid_argument("label_ratio too small to keep one labeled graph per class");
    keep[c] = std::min(keep[c], static_cast<int>(by_class[c].size()));
  }

  Rng rng = make_rng(seed, 0x1abe1);
  std::vector<int> kept, moved;
  for (int c = 0; c < ds.num_classes; ++c) {
    auto& idx = by_class[c];
    std::shuffle(idx.begin(), idx.end(), rng);
    for (size_t i = 0; i < idx.size(); ++i)
      (static_cast<int>(i) < keep[c] ? kept : moved).push_back(idx[i]);
  }
  std::sort(kept.begin(), kept.end());
  split.labeled_train = std::move(kept);
  split.unlabeled_train.insert(split.unlabeled_train.end(), moved.begin(), moved.end());
  std::sort(split.unlabeled_train.begin(), split.unlabeled_train.end());
}

}  // namespace tgnn
