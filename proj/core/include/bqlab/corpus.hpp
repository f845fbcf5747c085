#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bqlab/field.hpp"

namespace bqlab {

enum class MemberKind { Gaussian, WavePacket, SingleMode, Noise };

std::string to_string(MemberKind k);

struct CorpusMember {
  Field field;
  MemberKind kind;
  std::string label;
  /// Largest group speed over occupied modes.
  double group_speed;
};

struct CorpusOptions {
  /// Occupied frequencies stay below this |xi|.
  double cutoff = 2.0;
  std::vector<MemberKind> kinds{MemberKind::Gaussian, MemberKind::WavePacket, MemberKind::SingleMode,
                                MemberKind::Noise};
  /// Centers drawn from [-spread, spread] in units of L.
  double center_spread = 1.0 / 16.0;
};

/// Reproducible test functions; member i depends only on (seed, i), so a
/// corpus of size 2m extends the corpus of size m.
struct Corpus {
  std::uint64_t seed = 0;
  std::vector<CorpusMember> members;

  double max_group_speed() const;
};

Corpus make_corpus(const Grid& g, std::uint64_t seed, std::size_t size, const CorpusOptions& opt = {});

/// Largest |xi| whose group speed keeps waves inside the box up to the horizon.
double safe_cutoff(const Grid& g, double horizon);

/// Localized kinds only (single modes do not disperse on the torus).
std::vector<MemberKind> localized_kinds();

}  // namespace bqlab
