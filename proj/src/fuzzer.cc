#include "corbfuzz/fuzzer.h"

#include <chrono>
#include <mutex>
#include <thread>

#include "corbfuzz/solver.h"
#include "corbfuzz/strings.h"

namespace corbfuzz::fuzzer {

int HitClass(std::uint32_t count) {
  if (count == 0)
    return 0;
  if (count <= 3)
    return static_cast<int>(count);
  if (count <= 7)
    return 4;
  if (count <= 15)
    return 5;
  if (count <= 31)
    return 6;
  if (count <= 127)
    return 7;
  return 8;
}

size_t CoverageBitmap::Bucket(const appscript::EdgeHit& edge) {
  return MixSeed({edge.program, static_cast<std::uint64_t>(edge.from + 1),
                  static_cast<std::uint64_t>(edge.to + 1)}) %
         kBuckets;
}

namespace {

std::map<size_t, std::uint32_t> BucketCounts(
    const std::map<appscript::EdgeHit, std::uint32_t>& edges) {
  std::map<size_t, std::uint32_t> counts;
  for (const auto& [edge, count] : edges)
    counts[CoverageBitmap::Bucket(edge)] += count;
  return counts;
}

}  // namespace

bool CoverageBitmap::IsNewCoverage(
    const std::map<appscript::EdgeHit, std::uint32_t>& edges) const {
  for (const auto& [bucket, count] : BucketCounts(edges)) {
    if (HitClass(count) > classes_[bucket])
      return true;
  }
  return false;
}

bool CoverageBitmap::Merge(
    const std::map<appscript::EdgeHit, std::uint32_t>& edges) {
  bool fresh = false;
  for (const auto& [bucket, count] : BucketCounts(edges)) {
    auto cls = static_cast<std::uint8_t>(HitClass(count));
    if (cls > classes_[bucket]) {
      classes_[bucket] = cls;
      fresh = true;
    }
  }
  return fresh;
}

size_t CoverageBitmap::covered_buckets() const {
  size_t n = 0;
  for (std::uint8_t c : classes_)
    n += c != 0;
  return n;
}

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kReplaceParam:
      return "replace-param";
    case Strategy::kAddParam:
      return "add-param";
    case Strategy::kDeleteParam:
      return "delete-param";
    case Strategy::kFlipSeedBits:
      return "flip-seed-bits";
    case Strategy::kFreshSeed:
      return "fresh-seed";
    case Strategy::kIncrementSeed:
      return "increment-seed";
  }
  return "";
}

namespace {

std::string PickValue(Rng& rng, const std::vector<std::string>& dictionary) {
  if (!dictionary.empty() && rng.Chance(1, 2))
    return dictionary[rng.Below(dictionary.size())];
  if (rng.Chance(1, 4))
    return std::to_string(rng.Range(-10, 1000));
  return RandomSynthString(rng);
}

std::string PickName(Rng& rng, const std::vector<std::string>& dictionary) {
  std::string name;
  if (!dictionary.empty())
    name = dictionary[rng.Below(dictionary.size())];
  if (name.empty())
    name = "p" + std::to_string(rng.Below(10));
  return name;
}

}  // namespace

CorpusEntry Mutate(const CorpusEntry& entry, Rng& rng,
                   const std::vector<std::string>& dictionary,
                   Strategy* applied) {
  auto strategy = static_cast<Strategy>(rng.Below(kStrategyCount));
  if (applied)
    *applied = strategy;
  QueryParams params = entry.request.query_params();
  Seed seed = entry.seed;
  switch (strategy) {
    case Strategy::kReplaceParam:
      if (params.empty())
        params.emplace_back(PickName(rng, dictionary), PickValue(rng, dictionary));
      else
        params[rng.Below(params.size())].second = PickValue(rng, dictionary);
      break;
    case Strategy::kAddParam:
      params.emplace_back(PickName(rng, dictionary), PickValue(rng, dictionary));
      break;
    case Strategy::kDeleteParam:
      if (!params.empty())
        params.erase(params.begin() +
                     static_cast<std::ptrdiff_t>(rng.Below(params.size())));
      break;
    case Strategy::kFlipSeedBits: {
      std::uint64_t flips = 1 + rng.Below(4);
      std::set<std::uint64_t> bits;
      while (bits.size() < flips)
        bits.insert(rng.Below(32));
      for (std::uint64_t bit : bits)
        seed ^= Seed{1} << bit;
      break;
    }
    case Strategy::kFreshSeed:
      seed = static_cast<Seed>(rng.Next());
      break;
    case Strategy::kIncrementSeed:
      ++seed;
      break;
  }
  return {entry.request.WithParams(std::move(params)), seed};
}

std::string ResponseDigest(const HttpResponse& response) {
  std::string canonical;
  bool in_digits = false;
  for (char c : response.body()) {
    if (c >= '0' && c <= '9') {
      if (!in_digits)
        canonical.push_back('#');
      in_digits = true;
    } else {
      canonical.push_back(c);
      in_digits = false;
    }
  }
  std::string text = std::to_string(response.status()) + "\n" +
                     MimeName(response.content_type()) + "\n" + canonical;
  return HexDigest(Fnv1a64(text));
}

namespace {

constexpr int kFrontierRetries = 8;

class Campaign {
 public:
  Campaign(const appscript::App& app, const CampaignConfig& config)
      : app_(app),
        config_(config),
        engines_(policy::MakeEngines(config.engines, config.policy)),
        queries_(config.query_options),
        dictionary_(app.Dictionary()),
        start_(std::chrono::steady_clock::now()) {
    handles_.queries = &queries_;
    handles_.sessions = &sessions_;
    handles_.session_options = config.session_options;
    frontier_.push_back(appscript::App::kEntryPath);
    known_urls_.insert(appscript::App::kEntryPath);
  }

  CampaignResult Run() {
    int workers = std::max(1, config_.workers);
    if (workers == 1) {
      Worker(0);
    } else {
      std::vector<std::thread> threads;
      for (int w = 0; w < workers; ++w)
        threads.emplace_back([this, w] { Worker(w); });
      for (std::thread& t : threads)
        t.join();
    }
    result_.app_id = app_.id();
    result_.corpus_size = corpus_.size();
    result_.frontier_size = frontier_.size();
    result_.covered_buckets = bitmap_.covered_buckets();
    result_.elapsed_seconds = Elapsed();
    return std::move(result_);
  }

 private:
  double Elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

  bool ShouldTerminate() const {
    if (config_.max_iterations && result_.iterations >= config_.max_iterations)
      return true;
    return Elapsed() >= config_.budget_seconds;
  }

  // Picks the next input under the lock; nullopt when the iteration was
  // spent on an already visited input or nothing is schedulable.
  std::optional<CorpusEntry> Next(Rng& rng, bool* from_frontier) {
    *from_frontier = false;
    size_t pool = corpus_.size() + frontier_.size();
    if (pool == 0)
      return std::nullopt;
    size_t pick = rng.Below(pool);
    CorpusEntry input{HttpRequest(Scheme::kHttp, "/"), 0};
    if (pick < corpus_.size()) {
      input = Mutate(corpus_[pick], rng, dictionary_);
    } else {
      std::string url = frontier_[pick - corpus_.size()];
      frontier_.erase(frontier_.begin() +
                      static_cast<std::ptrdiff_t>(pick - corpus_.size()));
      Seed seed = static_cast<Seed>(rng.Next());
      *from_frontier = true;
      try {
        input = {HttpRequest::FromUrl(url), seed};
      } catch (const std::invalid_argument&) {
        return std::nullopt;
      }
    }
    if (!visited_.insert({input.request.Url(), input.seed}).second)
      return std::nullopt;
    return input;
  }

  void Worker(int index) {
    Rng rng(MixSeed({config_.rng_seed, static_cast<std::uint64_t>(index)}));
    while (true) {
      std::optional<CorpusEntry> input;
      bool from_frontier = false;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        if (ShouldTerminate())
          return;
        if (corpus_.empty() && frontier_.empty() && inflight_ == 0)
          return;  // nothing left to schedule
        ++result_.iterations;
        input = Next(rng, &from_frontier);
        if (input)
          ++inflight_;
      }
      if (!input)
        continue;
      appscript::ExecutionResult exec =
          appscript::ExecuteApp(app_, input->request, input->seed, handles_);
      std::vector<PolicyDecision> decisions;
      if (!exec.aborted)
        decisions = policy::EvaluateAll(engines_, exec.response);
      std::vector<std::string> links;
      if (!exec.aborted)
        links = appscript::ExtractLinks(exec.response, input->request.path());

      std::lock_guard<std::mutex> lock(mutex_);
      --inflight_;
      ++result_.executions;
      if (config_.observer)
        config_.observer(*input, exec);
      result_.max_bits_used = std::max(result_.max_bits_used, exec.bits_used);
      if (exec.aborted) {
        ++result_.aborts;
        // A link whose first seeds abort is retried before it is given up.
        std::string url = input->request.Url();
        if (from_frontier && ++frontier_retries_[url] < kFrontierRetries)
          frontier_.push_back(url);
        continue;
      }
      result_.type_stats += exec.type_stats;
      for (const auto& [edge, count] : exec.edges)
        result_.edges.insert(edge);
      for (const std::string& link : links) {
        if (known_urls_.insert(link).second)
          frontier_.push_back(link);
      }
      if (bitmap_.Merge(exec.edges))
        corpus_.push_back(*input);
      std::string digest = ResponseDigest(exec.response);
      if (seen_digests_.insert(digest).second) {
        result_.sink.push_back({input->request, input->seed, exec.response,
                                digest, std::move(exec.access_log),
                                std::move(decisions)});
      }
    }
  }

  const appscript::App& app_;
  const CampaignConfig& config_;
  std::vector<policy::PolicyEngine> engines_;
  synth::QuerySynthesizer queries_;
  synth::GlobalSessionCache sessions_;
  appscript::SynthHandles handles_;
  std::vector<std::string> dictionary_;
  std::chrono::steady_clock::time_point start_;

  std::mutex mutex_;
  int inflight_ = 0;
  CoverageBitmap bitmap_;
  std::vector<CorpusEntry> corpus_;
  std::vector<std::string> frontier_;
  std::set<std::string> known_urls_;
  std::map<std::string, int> frontier_retries_;
  std::set<std::pair<std::string, Seed>> visited_;
  std::set<std::string> seen_digests_;
  CampaignResult result_;
};

}  // namespace

CampaignResult RunCampaign(const appscript::App& app,
                           const CampaignConfig& config) {
  return Campaign(app, config).Run();
}

}  // namespace corbfuzz::fuzzer
