#pragma once

// Helpers shared by the unit and acceptance tests.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pctdialog/domain.hpp"
#include "pctdialog/gateway.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(PCTDIALOG_FIXTURES) / name; }

inline pctdialog::Json load_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return pctdialog::Json::parse(in);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("pctdialog-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Clock whose sleeps only advance a counter, so retry tests run instantly.
struct FakeClock {
  std::shared_ptr<std::chrono::steady_clock::time_point> now =
      std::make_shared<std::chrono::steady_clock::time_point>();
  std::shared_ptr<std::chrono::milliseconds> slept = std::make_shared<std::chrono::milliseconds>(0);

  pctdialog::Clock clock() const {
    auto n = now;
    auto s = slept;
    return pctdialog::Clock{[n] { return *n; },
                            [n, s](std::chrono::milliseconds d) {
                              *n += d;
                              *s += d;
                            }};
  }
};

/// Gateway over a mock with zero-cost backoff.
inline std::unique_ptr<pctdialog::ChatGateway> mock_gateway(std::shared_ptr<pctdialog::MockChatBackend> mock,
                                                            std::shared_ptr<pctdialog::ProvenanceLog> log = nullptr,
                                                            pctdialog::BackendConfig cfg = {}) {
  FakeClock fc;
  return std::make_unique<pctdialog::ChatGateway>(std::move(mock), std::move(cfg), std::move(log), fc.clock());
}

/// Twenty judged pairs whose per-method sums are BLRI 684 / 442 and General
/// 1117 / 967: Hybrid at 2.85 / 9.31 and Script Mode at 1.84 / 8.06 after rounding.
inline std::vector<std::pair<pctdialog::GeneralScores, pctdialog::BlriScores>> table_fixture() {
  using namespace pctdialog;
  std::vector<std::pair<GeneralScores, BlriScores>> out(20);
  // Every cell gets `base`; the first k cells in pair order get base + step.
  auto spread = [&](auto pick, int base, int k, int step) {
    for (auto& p : out)
      for (auto& v : pick(p)) {
        v = base + (k > 0 ? step : 0);
        --k;
      }
  };
  spread([](auto& p) -> auto& { return p.first.dialogue_1; }, 10, 83, -1);  // 1117
  spread([](auto& p) -> auto& { return p.first.dialogue_2; }, 8, 7, 1);     // 967
  spread([](auto& p) -> auto& { return p.second.dialogue_1; }, 3, 36, -1);  // 684
  spread([](auto& p) -> auto& { return p.second.dialogue_2; }, 2, 38, -1);  // 442
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace testing
