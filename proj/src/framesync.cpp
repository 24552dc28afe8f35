#include "phoneval/framesync.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phoneval/error.hpp"
#include "phoneval/parallel.hpp"

namespace phoneval {

ContingencyTable::ContingencyTable(int num_labels, int num_units)
    : counts_(CountMatrix::Zero(num_labels, num_units)) {}

ContingencyTable::ContingencyTable(CountMatrix counts)
    : counts_(std::move(counts)) {
  if ((counts_.array() < 0).any())
    throw ValidationError("contingency table: negative count");
  total_ = counts_.sum();
}

Eigen::MatrixXd ContingencyTable::joint() const {
  if (total_ == 0) return Eigen::MatrixXd::Zero(counts_.rows(), counts_.cols());
  return counts_.cast<double>() / static_cast<double>(total_);
}

ContingencyTable& ContingencyTable::operator+=(const ContingencyTable& other) {
  if (other.counts_.rows() != counts_.rows() ||
      other.counts_.cols() != counts_.cols())
    throw ValidationError("contingency merge: dimension mismatch (" +
                          std::to_string(counts_.rows()) + "x" +
                          std::to_string(counts_.cols()) + " vs " +
                          std::to_string(other.counts_.rows()) + "x" +
                          std::to_string(other.counts_.cols()) + ")");
  counts_ += other.counts_;
  total_ += other.total_;
  return *this;
}

ContingencyTable merge(const ContingencyTable& a, const ContingencyTable& b) {
  ContingencyTable out = a;
  out += b;
  return out;
}

Micros frame_center(long frame_index, double frame_rate) {
  return std::llround((static_cast<double>(frame_index) + 0.5) *
                      static_cast<double>(kMicrosPerSecond) / frame_rate);
}

namespace {

PhoneIndex label_at(const GoldUtterance& utt, Micros t, PhoneIndex silence) {
  // Last segment with onset <= t.
  auto it = std::upper_bound(
      utt.segments.begin(), utt.segments.end(), t,
      [](Micros v, const PhoneSegment& s) { return v < s.onset; });
  if (it == utt.segments.begin()) return silence;
  --it;
  return t < it->offset ? it->phone : silence;
}

}  // namespace

PhoneIndex frame_label(const GoldUtterance& utt, long frame_index,
                       double frame_rate, PhoneIndex silence) {
  const Micros c = frame_center(frame_index, frame_rate);
  if (frame_index < 0 || c >= utt.duration)
    throw ValidationError("frame " + std::to_string(frame_index) +
                          " lies beyond the utterance duration");
  return label_at(utt, c, silence);
}

PhoneIndex frame_label(const PhoneCorpus& corpus, const std::string& utt,
                       long frame_index, double frame_rate,
                       const PhonemeInventory& inv) {
  auto it = corpus.utterances.find(utt);
  if (it == corpus.utterances.end())
    throw ValidationError("unknown utterance " + utt);
  return frame_label(it->second, frame_index, frame_rate, inv.silence_index());
}

std::vector<PhoneIndex> frame_labels(const GoldUtterance& utt,
                                     long num_frames, double frame_rate,
                                     PhoneIndex silence,
                                     const std::string& utt_id) {
  const long expected = std::lround(static_cast<double>(utt.duration) *
                                    frame_rate / kMicrosPerSecond);
  if (std::abs(num_frames - expected) > 1)
    throw ValidationError(
        "utterance " + utt_id + ": " + std::to_string(num_frames) +
        " unit frames but gold duration implies " + std::to_string(expected));
  std::vector<PhoneIndex> labels(static_cast<std::size_t>(num_frames));
  for (long k = 0; k < num_frames; ++k) {
    const Micros c = frame_center(k, frame_rate);
    labels[k] = c >= utt.duration ? silence : label_at(utt, c, silence);
  }
  return labels;
}

ContingencyTable build_contingency(const PhoneCorpus& gold,
                                   const UnitCorpus& units,
                                   const PhonemeInventory& inv, int vocab_size,
                                   int threads) {
  require_matching_utterances(gold, units);
  std::vector<const std::string*> ids;
  ids.reserve(gold.utterances.size());
  for (const auto& [id, _] : gold.utterances) ids.push_back(&id);

  const auto chunks = num_chunks(ids.size(), threads);
  std::vector<ContingencyTable> partial(
      chunks, ContingencyTable(inv.num_labels(), vocab_size));
  for_each_chunk(ids.size(), threads, [&](std::size_t w, std::size_t b,
                                          std::size_t e) {
    auto& table = partial[w];
    for (std::size_t i = b; i < e; ++i) {
      const auto& id = *ids[i];
      const auto& stream = units.utterances.at(id);
      const auto labels =
          frame_labels(gold.utterances.at(id), static_cast<long>(stream.size()),
                       units.frame_rate, inv.silence_index(), id);
      for (std::size_t t = 0; t < stream.size(); ++t) {
        if (stream[t] >= vocab_size)
          throw ValidationError("utterance " + id + ", frame " +
                                std::to_string(t) + ": unit id " +
                                std::to_string(stream[t]) +
                                " >= vocab size " + std::to_string(vocab_size));
        table.add(labels[t], stream[t]);
      }
    }
  });
  ContingencyTable out(inv.num_labels(), vocab_size);
  for (const auto& t : partial) out += t;
  return out;
}

std::string contingency_tsv(const ContingencyTable& table,
                            const PhonemeInventory& inv) {
  std::ostringstream out;
  out << "phone";
  for (int j = 0; j < table.num_units(); ++j) out << '\t' << j;
  out << '\n';
  for (int i = 0; i < table.num_labels(); ++i) {
    out << inv.symbol(i);
    for (int j = 0; j < table.num_units(); ++j)
      out << '\t' << table.counts()(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace phoneval
