// SPDX-License-Identifier: Apache-2.0
#include "translit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "translit/errors.hpp"

namespace translit {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are written in host order");

namespace {

constexpr char kMagic[8] = {'T', 'R', 'L', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kMaxHeader = 64ull << 20;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw CompatibilityError("checkpoint truncated");
  return value;
}

nlohmann::json vocab_json(const Vocabulary& v) {
  auto arr = nlohmann::json::array();
  for (char32_t c : v.symbols()) arr.push_back(static_cast<std::uint32_t>(c));
  return arr;
}

Vocabulary vocab_from_json(const nlohmann::json& arr) {
  std::vector<char32_t> symbols;
  for (const auto& c : arr) symbols.push_back(static_cast<char32_t>(c.get<std::uint32_t>()));
  return Vocabulary(std::move(symbols));
}

}  // namespace

void Checkpoint::check_consistent() const {
  if (params.dims.src_vocab != src_vocab.size() || params.dims.tgt_vocab != tgt_vocab.size())
    throw CompatibilityError(
        "vocabulary sizes (" + std::to_string(src_vocab.size()) + ", " +
        std::to_string(tgt_vocab.size()) + ") do not match model dimensions (" +
        std::to_string(params.dims.src_vocab) + ", " + std::to_string(params.dims.tgt_vocab) + ")");
  const ModelParams expected = ModelParams::zeros(params.dims);
  auto want = expected.named();
  auto have = params.named();
  for (std::size_t i = 0; i < want.size(); ++i)
    if (want[i].second->shape() != have[i].second->shape())
      throw CompatibilityError("parameter " + have[i].first + " has shape " +
                               shape_string(have[i].second->shape()) + ", expected " +
                               shape_string(want[i].second->shape()));
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  ckpt.check_consistent();
  const auto& d = ckpt.params.dims;
  nlohmann::json header;
  header["format"] = "translit-checkpoint";
  header["version"] = kCheckpointVersion;
  header["dims"] = {{"src_vocab", d.src_vocab}, {"tgt_vocab", d.tgt_vocab}, {"embed", d.embed},
                    {"hidden", d.hidden},       {"attention", d.attention}};
  header["src_vocab"] = vocab_json(ckpt.src_vocab);
  header["tgt_vocab"] = vocab_json(ckpt.tgt_vocab);
  auto tensors = nlohmann::json::array();
  for (const auto& [name, t] : ckpt.params.named())
    tensors.push_back({{"name", name}, {"shape", t->shape()}});
  header["tensors"] = tensors;
  const std::string text = header.dump();

  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : ckpt.params.named()) {
    auto v = t->values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CompatibilityError("not a transliteration checkpoint");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw CompatibilityError("checkpoint format version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kCheckpointVersion) + ")");
  const auto header_len = get<std::uint64_t>(in);
  if (header_len > kMaxHeader) throw CompatibilityError("checkpoint header too large");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len)))
    throw CompatibilityError("checkpoint truncated");

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    if (header.at("version").get<std::uint32_t>() != version)
      throw CompatibilityError("checkpoint header version disagrees with preamble");
    const auto& dj = header.at("dims");
    ModelDims dims;
    dims.src_vocab = dj.at("src_vocab").get<std::size_t>();
    dims.tgt_vocab = dj.at("tgt_vocab").get<std::size_t>();
    dims.embed = dj.at("embed").get<std::size_t>();
    dims.hidden = dj.at("hidden").get<std::size_t>();
    dims.attention = dj.at("attention").get<std::size_t>();
    ckpt.src_vocab = vocab_from_json(header.at("src_vocab"));
    ckpt.tgt_vocab = vocab_from_json(header.at("tgt_vocab"));
    ckpt.params = ModelParams::zeros(dims);

    const auto& tensors = header.at("tensors");
    auto named = ckpt.params.named();
    if (tensors.size() != named.size())
      throw CompatibilityError("checkpoint lists " + std::to_string(tensors.size()) +
                               " tensors, model needs " + std::to_string(named.size()));
    for (std::size_t i = 0; i < named.size(); ++i) {
      const auto name = tensors[i].at("name").get<std::string>();
      const auto shape = tensors[i].at("shape").get<Shape>();
      if (name != named[i].first || shape != named[i].second->shape())
        throw CompatibilityError("checkpoint tensor " + name + shape_string(shape) +
                                 " does not match expected " + named[i].first +
                                 shape_string(named[i].second->shape()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CompatibilityError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const InvalidInputError& e) {
    throw CompatibilityError(std::string("bad checkpoint contents: ") + e.what());
  }

  for (auto& [name, t] : ckpt.params.named()) {
    auto v = t->mutable_values();
    if (!in.read(reinterpret_cast<char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double))))
      throw CompatibilityError("checkpoint truncated in tensor " + name);
  }
  ckpt.check_consistent();
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace translit
