#ifndef CORBFUZZ_TESTS_SUPPORT_TEST_APPS_H_
#define CORBFUZZ_TESTS_SUPPORT_TEST_APPS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "corbfuzz/fuzzer.h"
#include "corbfuzz/interpreter.h"

namespace corbfuzz::testing {

std::filesystem::path SourceDir();
std::filesystem::path CorpusDir(const std::string& app);
appscript::App LoadCorpusApp(const std::string& app);

// App written to a fresh temporary directory, removed on destruction.
class TempApp {
 public:
  // |files| maps file names ("index.app") to source text.
  explicit TempApp(const std::map<std::string, std::string>& files);
  ~TempApp();
  TempApp(const TempApp&) = delete;
  TempApp& operator=(const TempApp&) = delete;

  const std::filesystem::path& dir() const { return dir_; }
  appscript::App Load() const { return appscript::App::Load(dir_); }

 private:
  std::filesystem::path dir_;
};

// Single worker, fixed master seed, iteration-capped: reproducible runs.
fuzzer::CampaignConfig DeterministicConfig(std::uint64_t iterations,
                                           std::uint64_t rng_seed = 1);

}  // namespace corbfuzz::testing

#endif  // CORBFUZZ_TESTS_SUPPORT_TEST_APPS_H_
