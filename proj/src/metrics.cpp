#include "phoneval/metrics.hpp"

#include <algorithm>

namespace phoneval {

LabelSeq collapse(std::span<const int> frames, int silence) {
  LabelSeq out;
  for (int label : frames)
    if (out.empty() || out.back() != label) out.push_back(label);
  auto first = std::find_if(out.begin(), out.end(),
                            [&](int l) { return l != silence; });
  out.erase(out.begin(), first);
  while (!out.empty() && out.back() == silence) out.pop_back();
  return out;
}

EditAlignment align(std::span<const int> gold, std::span<const int> hyp) {
  const std::size_t n = gold.size(), m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<int> d((n + 1) * w);
  for (std::size_t i = 0; i <= n; ++i) d[i * w] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = d[(i - 1) * w + j - 1] + (gold[i - 1] != hyp[j - 1]);
      const int del = d[(i - 1) * w + j] + 1;
      const int ins = d[i * w + j - 1] + 1;
      d[i * w + j] = std::min({sub, del, ins});
    }
  }

  EditAlignment out;
  out.distance = d[n * w + m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const int here = d[i * w + j];
    if (i > 0 && d[(i - 1) * w + j] + 1 == here) {
      out.pairs.push_back({EditOp::kDeletion, gold[i - 1], -1});
      --i;
    } else if (i > 0 && j > 0 &&
               d[(i - 1) * w + j - 1] + (gold[i - 1] != hyp[j - 1]) == here) {
      const bool same = gold[i - 1] == hyp[j - 1];
      out.pairs.push_back({same ? EditOp::kMatch : EditOp::kSubstitution,
                           gold[i - 1], hyp[j - 1]});
      --i;
      --j;
    } else {
      out.pairs.push_back({EditOp::kInsertion, -1, hyp[j - 1]});
      --j;
    }
  }
  std::reverse(out.pairs.begin(), out.pairs.end());
  return out;
}

double PerBreakdown::per() const {
  if (gold_length == 0)
    throw ValidationError("PER undefined: empty gold transcription");
  return static_cast<double>(edits()) / static_cast<double>(gold_length);
}

PerBreakdown& PerBreakdown::operator+=(const PerBreakdown& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  gold_length += o.gold_length;
  return *this;
}

void PerBreakdown::add(const EditAlignment& a, std::size_t n) {
  for (const auto& p : a.pairs) {
    switch (p.op) {
      case EditOp::kSubstitution: ++substitutions; break;
      case EditOp::kDeletion: ++deletions; break;
      case EditOp::kInsertion: ++insertions; break;
      case EditOp::kMatch: break;
    }
  }
  gold_length += static_cast<Count>(n);
}

PerBreakdown per(std::span<const int> gold, std::span<const int> hyp) {
  PerBreakdown b;
  b.add(align(gold, hyp), gold.size());
  return b;
}

void ClassConfusion::add(const EditAlignment& a, const PhonemeInventory& inv) {
  for (const auto& p : a.pairs) {
    if (p.op != EditOp::kSubstitution) continue;
    counts(static_cast<int>(inv.phone_class(p.gold)),
           static_cast<int>(inv.phone_class(p.hyp))) += 1;
  }
}

ClassConfusion::Percent ClassConfusion::percent() const {
  Percent out = Percent::Zero();
  for (int r = 0; r < kNumPhonemeClasses; ++r) {
    const Count total = counts.row(r).sum();
    if (total == 0) continue;
    out.row(r) = counts.row(r).cast<double>() * (100.0 / total);
  }
  return out;
}

ClassConfusion class_confusion(std::span<const int> gold,
                               std::span<const int> hyp,
                               const PhonemeInventory& inv) {
  ClassConfusion c;
  c.add(align(gold, hyp), inv);
  return c;
}

std::vector<Micros> boundaries(std::span<const int> frames,
                               double frame_rate) {
  std::vector<Micros> out;
  for (std::size_t k = 1; k < frames.size(); ++k)
    if (frames[k] != frames[k - 1])
      out.push_back(std::llround(static_cast<double>(k) * kMicrosPerSecond /
                                 frame_rate));
  return out;
}

namespace {

struct Interval {
  Micros start;
  int label;
};

// Label timeline of an utterance with explicit silence for gaps.
std::vector<Interval> timeline(const GoldUtterance& utt, PhoneIndex silence) {
  std::vector<Interval> out;
  Micros cursor = 0;
  for (const auto& s : utt.segments) {
    if (s.onset > cursor) out.push_back({cursor, silence});
    out.push_back({s.onset, s.phone});
    cursor = s.offset;
  }
  return out;
}

}  // namespace

std::vector<Micros> boundaries(const GoldUtterance& utt, PhoneIndex silence) {
  std::vector<Micros> out;
  const auto tl = timeline(utt, silence);
  for (std::size_t k = 1; k < tl.size(); ++k)
    if (tl[k].label != tl[k - 1].label) out.push_back(tl[k].start);
  return out;
}

LabelSeq gold_transcription(const GoldUtterance& utt, PhoneIndex silence) {
  std::vector<int> labels;
  for (const auto& iv : timeline(utt, silence)) labels.push_back(iv.label);
  return collapse(labels, silence);
}

Count match_boundaries(std::span<const Micros> gold,
                       std::span<const Micros> pred, Micros tolerance) {
  if (!std::is_sorted(gold.begin(), gold.end()) ||
      !std::is_sorted(pred.begin(), pred.end()))
    throw ValidationError("match_boundaries: boundary lists must be sorted");
  if (gold.empty()) return 0;

  // A prediction belongs to its nearest gold boundary (earlier one on an
  // exact midpoint), which is the midpoint split of overlapping windows.
  std::vector<char> taken(gold.size(), 0);
  Count hits = 0;
  for (Micros p : pred) {
    auto it = std::lower_bound(gold.begin(), gold.end(), p);
    std::size_t k;
    if (it == gold.end()) {
      k = gold.size() - 1;
    } else if (it == gold.begin()) {
      k = 0;
    } else {
      const auto hi = static_cast<std::size_t>(it - gold.begin());
      k = (p - gold[hi - 1] <= gold[hi] - p) ? hi - 1 : hi;
    }
    // Equal gold times: the first copy owns the window.
    while (k > 0 && gold[k - 1] == gold[k]) --k;
    const Micros delta = p > gold[k] ? p - gold[k] : gold[k] - p;
    if (delta <= tolerance && !taken[k]) {
      taken[k] = 1;
      ++hits;
    }
  }
  return hits;
}

BoundaryScore segmentation_scores(const BoundaryCounts& c) {
  if (c.gold == 0)
    throw ValidationError("segmentation scores undefined: no gold boundaries");
  BoundaryScore s;
  s.hits = c.hits;
  s.gold_count = c.gold;
  s.pred_count = c.pred;
  const double hr = static_cast<double>(c.hits) / static_cast<double>(c.gold);
  const double precision =
      c.pred > 0 ? static_cast<double>(c.hits) / static_cast<double>(c.pred)
                 : 0.0;
  const double f1 = precision + hr > 0 ? 2 * precision * hr / (precision + hr)
                                       : 0.0;
  // recall / precision - 1 == pred / gold - 1, which stays defined when
  // there are no hits or no predictions.
  const double os =
      static_cast<double>(c.pred) / static_cast<double>(c.gold) - 1.0;
  const double r1 = std::sqrt((1 - hr) * (1 - hr) + os * os);
  const double r2 = (-os + hr - 1) / std::sqrt(2.0);
  s.precision = 100.0 * precision;
  s.recall = 100.0 * hr;
  s.f1 = 100.0 * f1;
  s.over_segmentation = os;
  s.r_value = (1 - (std::abs(r1) + std::abs(r2)) / 2) * 100.0;
  return s;
}

}  // namespace phoneval
