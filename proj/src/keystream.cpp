#include "mccs/keystream.hpp"

#include <fstream>

#include "json.hpp"
#include "mccs/errors.hpp"

namespace mccs::keystream {

KeyChain make_keychain(int class_count, Seed master) {
  if (class_count < 1) {
    throw std::invalid_argument("make_keychain: class count must be >= 1");
  }
  BitStream stream(master);
  KeyChain keys;
  keys.matrix_seed = Seed{stream.next_word()};
  keys.flip_seeds.reserve(static_cast<std::size_t>(class_count) - 1);
  for (int i = 0; i + 1 < class_count; ++i) {
    keys.flip_seeds.push_back(Seed{stream.next_word()});
  }
  return keys;
}

std::vector<Seed> derive_seeds(Seed master, std::size_t count) {
  BitStream stream(master);
  std::vector<Seed> seeds(count);
  for (auto& s : seeds) {
    s = Seed{stream.next_word()};
  }
  return seeds;
}

void save_keychain(const std::string& path, const KeyChain& keys) {
  nlohmann::json doc;
  doc["w"] = keys.class_count();
  doc["matrix_seed"] = std::to_string(keys.matrix_seed.value);
  auto flips = nlohmann::json::array();
  for (const auto& s : keys.flip_seeds) {
    flips.push_back(std::to_string(s.value));
  }
  doc["flip_seeds"] = std::move(flips);

  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open key file for writing: " + path);
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw IoError("failed writing key file: " + path);
  }
}

KeyChain load_keychain(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open key file: " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed key file " + path + ": " + e.what());
  }

  KeyChain keys;
  try {
    keys.matrix_seed = Seed{std::stoull(doc.at("matrix_seed").get<std::string>())};
    for (const auto& s : doc.at("flip_seeds")) {
      keys.flip_seeds.push_back(Seed{std::stoull(s.get<std::string>())});
    }
    const int w = doc.at("w").get<int>();
    if (w != keys.class_count()) {
      throw IoError("key file " + path + ": w does not match flip seed count");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed key file " + path + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw IoError("malformed seed in key file " + path + ": " + e.what());
  }
  return keys;
}

}  // namespace mccs::keystream
