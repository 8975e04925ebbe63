// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "translit/model.hpp"
#include "translit/vocab.hpp"

namespace translit {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Parameters plus the vocabularies they were trained with.
struct Checkpoint {
  ModelParams params;
  Vocabulary src_vocab;
  Vocabulary tgt_vocab;

  /// Throws CompatibilityError if vocabulary sizes disagree with the
  /// parameter shapes.
  void check_consistent() const;
};

// Layout: 8-byte magic "TRLTCKPT", u32 format version, u64 header length,
// a JSON header (dims, vocabularies as code points, tensor names and shapes),
// then every tensor's values as little-endian IEEE-754 doubles in header
// order.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace translit
