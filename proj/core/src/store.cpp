#include "squatguard/store.hpp"

#include <stdexcept>

namespace squatguard {

std::optional<json> MemoryBackend::get(const std::string& c,
                                       const std::string& id) {
  std::lock_guard lk(mu_);
  auto ci = collections_.find(c);
  if (ci == collections_.end()) return std::nullopt;
  auto ri = ci->second.find(id);
  if (ri == ci->second.end()) return std::nullopt;
  return ri->second;
}

void MemoryBackend::put(const std::string& c, const std::string& id,
                        const json& v) {
  std::lock_guard lk(mu_);
  collections_[c][id] = v;
}

void MemoryBackend::erase(const std::string& c, const std::string& id) {
  std::lock_guard lk(mu_);
  auto ci = collections_.find(c);
  if (ci != collections_.end()) ci->second.erase(id);
}

std::vector<std::pair<std::string, json>> MemoryBackend::scan(
    const std::string& c) {
  std::lock_guard lk(mu_);
  std::vector<std::pair<std::string, json>> out;
  auto ci = collections_.find(c);
  if (ci == collections_.end()) return out;
  out.assign(ci->second.begin(), ci->second.end());
  return out;
}

void MemoryBackend::append_log(const std::string& log, const std::string& line) {
  std::lock_guard lk(mu_);
  logs_[log].push_back(line);
}

std::vector<std::string> MemoryBackend::read_log(const std::string& log) {
  std::lock_guard lk(mu_);
  auto it = logs_.find(log);
  return it == logs_.end() ? std::vector<std::string>{} : it->second;
}

FileBackend::FileBackend(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  load();
  wal_.open(dir_ / "records.wal", std::ios::app);
  if (!wal_) throw std::runtime_error("cannot open WAL: " + dir_.string());
}

FileBackend::~FileBackend() = default;

void FileBackend::load() {
  auto snap_path = dir_ / "snapshot.json";
  if (std::filesystem::exists(snap_path)) {
    std::ifstream in(snap_path);
    json snap = json::parse(in);
    for (auto& [coll, records] : snap.items())
      for (auto& [id, value] : records.items()) collections_[coll][id] = value;
  }
  auto wal_path = dir_ / "records.wal";
  if (std::filesystem::exists(wal_path)) {
    std::ifstream in(wal_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json e = json::parse(line);
      const std::string coll = e.at("collection").get<std::string>();
      const std::string id = e.at("id").get<std::string>();
      if (e.at("op") == "put")
        collections_[coll][id] = e.at("value");
      else
        collections_[coll].erase(id);
    }
  }
}

void FileBackend::append_wal(const json& entry) {
  wal_ << canonical_dump(entry) << '\n';
  wal_.flush();
  if (!wal_) throw std::runtime_error("WAL write failed");
}

std::optional<json> FileBackend::get(const std::string& c,
                                     const std::string& id) {
  std::lock_guard lk(mu_);
  auto ci = collections_.find(c);
  if (ci == collections_.end()) return std::nullopt;
  auto ri = ci->second.find(id);
  if (ri == ci->second.end()) return std::nullopt;
  return ri->second;
}

void FileBackend::put(const std::string& c, const std::string& id,
                      const json& v) {
  std::lock_guard lk(mu_);
  append_wal(json{{"collection", c}, {"id", id}, {"op", "put"}, {"value", v}});
  collections_[c][id] = v;
}

void FileBackend::erase(const std::string& c, const std::string& id) {
  std::lock_guard lk(mu_);
  append_wal(json{{"collection", c}, {"id", id}, {"op", "erase"}});
  auto ci = collections_.find(c);
  if (ci != collections_.end()) ci->second.erase(id);
}

std::vector<std::pair<std::string, json>> FileBackend::scan(
    const std::string& c) {
  std::lock_guard lk(mu_);
  std::vector<std::pair<std::string, json>> out;
  auto ci = collections_.find(c);
  if (ci == collections_.end()) return out;
  out.assign(ci->second.begin(), ci->second.end());
  return out;
}

std::ofstream& FileBackend::log_stream(const std::string& log) {
  auto it = log_streams_.find(log);
  if (it == log_streams_.end()) {
    std::ofstream f(dir_ / (log + ".log"), std::ios::app);
    if (!f) throw std::runtime_error("cannot open log: " + log);
    it = log_streams_.emplace(log, std::move(f)).first;
  }
  return it->second;
}

void FileBackend::append_log(const std::string& log, const std::string& line) {
  std::lock_guard lk(mu_);
  auto& f = log_stream(log);
  f << line << '\n';
  f.flush();
  if (!f) throw std::runtime_error("log write failed: " + log);
}

std::vector<std::string> FileBackend::read_log(const std::string& log) {
  std::lock_guard lk(mu_);
  std::vector<std::string> out;
  std::ifstream in(dir_ / (log + ".log"));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

void FileBackend::compact() {
  std::lock_guard lk(mu_);
  json snap = json::object();
  for (const auto& [coll, records] : collections_) {
    json r = json::object();
    for (const auto& [id, value] : records) r[id] = value;
    snap[coll] = r;
  }
  auto tmp = dir_ / "snapshot.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << snap.dump(2) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("snapshot write failed");
  }
  std::filesystem::rename(tmp, dir_ / "snapshot.json");
  wal_.close();
  wal_.open(dir_ / "records.wal", std::ios::trunc);
  if (!wal_) throw std::runtime_error("WAL truncate failed");
}

std::unique_ptr<StorageBackend> make_backend(const std::string& storage_path) {
  if (storage_path.empty()) return std::make_unique<MemoryBackend>();
  return std::make_unique<FileBackend>(storage_path);
}

}  // namespace squatguard
