#include "artifacts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "dropwarn/error.hpp"

namespace dropwarn::cli {

namespace fs = std::filesystem;

std::string Sha256Hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string OutputSet::PathOf(const std::string& name) const { return (fs::path(dir_) / name).string(); }

void OutputSet::Commit() const {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir_ + ": " + ec.message());
  std::vector<std::pair<fs::path, fs::path>> staged;
  for (const auto& [name, bytes] : files_) {
    const fs::path final_path = fs::path(dir_) / name;
    fs::path tmp = final_path;
    tmp += ".partial";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      for (const auto& [t, f] : staged) fs::remove(t, ec);
      fs::remove(tmp, ec);
      throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    }
    staged.emplace_back(tmp, final_path);
  }
  for (const auto& [tmp, final_path] : staged) {
    fs::rename(tmp, final_path, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot rename into " + final_path.string());
  }
}

nlohmann::json Manifest(const std::string& subcommand, const std::vector<std::string>& argv,
                        const nlohmann::json& config, const std::vector<std::string>& inputs,
                        const OutputSet& outputs) {
  nlohmann::json doc;
  doc["tool"] = "dropwarn";
  doc["subcommand"] = subcommand;
  doc["argv"] = argv;
  doc["config"] = config;
  auto& in = doc["inputs"] = nlohmann::json::object();
  for (const auto& path : inputs) in[path] = Sha256Hex(ReadFile(path));
  auto& out = doc["outputs"] = nlohmann::json::object();
  for (const auto& [name, bytes] : outputs.files()) out[name] = Sha256Hex(bytes);
  return doc;
}

}  // namespace dropwarn::cli
