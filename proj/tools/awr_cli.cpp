// awr: command-line driver for the authentication-with-response toolkit.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "awr/awr.hpp"

namespace {

using awr::Error;
using awr::ErrorCode;
using json = nlohmann::json;

enum Exit : int { kOk = 0, kFail = 1, kGuard = 2, kRejected = 3, kTransport = 4 };

struct Globals {
  std::uint64_t seed = 1;
  std::string output = "-";
  std::string format = "csv";
};

/// Writes to --output (or stdout) once the command finishes.
class Sink {
 public:
  explicit Sink(const Globals& g) : g_(g) {}
  std::ostringstream& csv() { return buf_; }
  bool json_mode() const { return g_.format == "json"; }
  void flush_json(const json& j) { buf_ << j.dump(2) << '\n'; }
  ~Sink() {
    if (g_.output == "-" || g_.output.empty()) {
      std::cout << buf_.str() << std::flush;
    } else {
      std::ofstream out(g_.output, std::ios::trunc);
      out << buf_.str();
    }
  }

 private:
  const Globals& g_;
  std::ostringstream buf_;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json to_json(const awr::RateEstimate& e) {
  return {{"attack", e.attack},   {"params", e.params},          {"trials", e.trials},
          {"successes", e.successes}, {"rate", e.rate},          {"stderr", e.stderr_},
          {"bound", awr::to_string(e.bound)}, {"exhaustive", e.exhaustive}, {"pass", e.pass}};
}

json to_json(std::uint64_t i, const awr::RoundOutcome& o) {
  return {{"round_index", i},
          {"scheme", std::string(awr::to_string(o.scheme))},
          {"mode", std::string(awr::to_string(o.mode))},
          {"alice_verdict", std::string(awr::to_string(o.alice))},
          {"bob_verdict", std::string(awr::to_string(o.bob))},
          {"reason", std::string(awr::to_string(o.reason))},
          {"keys_consumed", o.keys_consumed}};
}

// --- check-asu2 -------------------------------------------------------------

int cmd_check_asu2(const Globals& g, unsigned tag_bits, std::uint32_t max_blocks) {
  const auto p = awr::FamilyParams::polynomial(tag_bits, max_blocks);
  const auto report = awr::check_asu2(p);
  Sink out(g);
  if (out.json_mode()) {
    out.flush_json({{"tag_bits", tag_bits},
                    {"max_blocks", max_blocks},
                    {"condition1_exact", report.condition1_exact},
                    {"condition2_max", awr::to_string(report.condition2_max)},
                    {"epsilon", awr::to_string(report.epsilon)},
                    {"pass", report.passes()}});
  } else {
    out.csv() << "tag_bits,max_blocks,condition1_exact,condition2_max,epsilon,pass\n"
              << tag_bits << ',' << max_blocks << ',' << (report.condition1_exact ? "true" : "false") << ','
              << awr::to_string(report.condition2_max) << ',' << awr::to_string(report.epsilon) << ','
              << (report.passes() ? "true" : "false") << '\n';
  }
  return report.passes() ? kOk : kFail;
}

// --- attack -----------------------------------------------------------------

awr::EstimateMode parse_estimate_mode(const std::string& s) {
  if (s == "auto") return awr::EstimateMode::Auto;
  if (s == "exhaustive") return awr::EstimateMode::Exhaustive;
  if (s == "sampled") return awr::EstimateMode::Sampled;
  throw Error(ErrorCode::ParseError, "unknown estimate mode '" + s + "'");
}

int cmd_attack(const Globals& g, const std::string& kind, unsigned tag_bits, std::uint32_t max_blocks,
               std::uint64_t trials, const std::string& mode_text) {
  const auto p = awr::FamilyParams::polynomial(tag_bits, max_blocks);
  const auto mode = parse_estimate_mode(mode_text);
  const awr::MessageBlocks honest{std::vector<awr::Word>(max_blocks, 1)};
  awr::RateEstimate e;
  if (kind == "impersonation") {
    e = awr::estimate_impersonation(p, trials, g.seed, mode);
  } else if (kind == "substitution") {
    e = awr::estimate_substitution(p, honest, awr::SubstitutionStrategy::bit_flip(), trials, g.seed, mode);
  } else if (kind == "substitution-consistent") {
    awr::MessageBlocks target = honest;
    target.blocks.back() ^= 1;
    e = awr::estimate_substitution(p, honest, awr::SubstitutionStrategy::consistent_key_forgery(target), trials,
                                   g.seed, mode);
  } else if (kind == "response-forge") {
    e = awr::estimate_response_forge(p, trials, g.seed, mode, awr::ForgeGuess::ConsistentKey, honest);
  } else if (kind == "response-forge-blind") {
    e = awr::estimate_response_forge(p, trials, g.seed, mode, awr::ForgeGuess::Blind, honest);
  } else {
    throw Error(ErrorCode::ParseError, "unknown attack kind '" + kind + "'");
  }
  Sink out(g);
  if (out.json_mode()) {
    out.flush_json(to_json(e));
  } else {
    out.csv() << awr::kRateCsvHeader << '\n';
    awr::write_csv_row(out.csv(), e);
  }
  return e.pass ? kOk : kFail;
}

// --- uc-check ---------------------------------------------------------------

int cmd_uc_check(const Globals& g, unsigned tag_bits, std::uint32_t max_blocks, std::uint32_t msg_space,
                 const std::vector<std::string>& key_dists) {
  const awr::uc::Setup setup{awr::FamilyParams::polynomial(tag_bits, max_blocks), msg_space};
  awr::uc::check_setup(setup);
  Sink out(g);
  json rows = json::array();
  if (!out.json_mode()) out.csv() << awr::uc::kSearchCsvHeader << '\n';
  bool all_ok = true;
  for (const auto& spec_text : key_dists) {
    const auto spec = awr::BiasSpec::parse(spec_text);
    const auto keys = awr::biased_distribution(spec, setup.keys());
    const auto r = awr::uc::max_distance_search(keys, setup);
    all_ok = all_ok && r.max_distance <= r.bound;
    if (out.json_mode()) {
      rows.push_back({{"key_dist", spec.describe()},
                      {"strategy_id", r.strategy_id},
                      {"distance", awr::to_string(r.max_distance)},
                      {"bound", awr::to_string(r.bound)},
                      {"slack", awr::to_string(r.slack)},
                      {"within_bound", r.max_distance <= r.bound}});
    } else {
      awr::uc::write_csv_row(out.csv(), setup, spec.describe(), r);
    }
  }
  if (out.json_mode()) out.flush_json(rows);
  return all_ok ? kOk : kFail;
}

// --- budget -----------------------------------------------------------------

int cmd_budget(const Globals& g, const awr::budget::BudgetParams& p, const std::string& scheme,
               std::optional<double> target) {
  if (scheme != "awr" && scheme != "straightforward" && scheme != "both") {
    throw Error(ErrorCode::ParseError, "scheme must be awr, straightforward or both");
  }
  Sink out(g);
  json doc = json::object();
  auto emit = [&](std::string_view name, const std::vector<awr::budget::BudgetRow>& rows) {
    if (out.json_mode()) {
      json arr = json::array();
      for (const auto& r : rows) {
        arr.push_back({{"round", r.round},
                       {"key_perfectness", r.key_perfectness},
                       {"auth_security", r.auth_security},
                       {"round_security", r.round_security},
                       {"vacuous", r.vacuous}});
      }
      doc[std::string(name)] = arr;
    } else {
      awr::budget::write_csv(out.csv(), name, rows);
    }
  };
  if (!out.json_mode()) out.csv() << awr::budget::kBudgetCsvHeader << '\n';
  if (scheme != "awr") emit("straightforward", awr::budget::straightforward_table(p));
  if (scheme != "straightforward") emit("awr", awr::budget::awr_table(p));
  if (target) {
    const auto c = awr::budget::crossover_report(p, *target);
    if (out.json_mode()) {
      doc["crossover"] = {{"target", *target},
                          {"rounds_straightforward", c.rounds_straightforward},
                          {"rounds_awr", c.rounds_awr}};
    } else {
      out.csv() << "# crossover target=" << fmt_double(*target) << " rounds_straightforward=" << c.rounds_straightforward
                << " rounds_awr=" << c.rounds_awr << '\n';
    }
  }
  if (out.json_mode()) out.flush_json(doc);
  return kOk;
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const Globals& g, awr::SimulationConfig config) {
  config.seed = g.seed;
  Sink out(g);
  json rows = json::array();
  if (!out.json_mode()) out.csv() << awr::kRoundCsvHeader << '\n';
  const auto summary = awr::run_simulation(config, [&](std::uint64_t i, const awr::RoundOutcome& o) {
    if (out.json_mode()) {
      rows.push_back(to_json(i, o));
    } else {
      awr::write_csv_row(out.csv(), i, o);
    }
  });
  char kpr[32];
  std::snprintf(kpr, sizeof kpr, "%.6f", summary.keys_per_round());
  if (out.json_mode()) {
    out.flush_json({{"rounds", rows},
                    {"summary",
                     {{"rounds", summary.rounds},
                      {"tampered", summary.tampered},
                      {"alice_accepts", summary.alice_accepts},
                      {"bob_accepts", summary.bob_accepts},
                      {"keys_consumed", summary.keys_consumed},
                      {"keys_per_round", summary.keys_per_round()}}}});
  } else {
    out.csv() << "# summary rounds=" << summary.rounds << " tampered=" << summary.tampered
              << " alice_accepts=" << summary.alice_accepts << " bob_accepts=" << summary.bob_accepts
              << " accept_rate=" << fmt_double(summary.alice_accept_rate()) << '\n'
              << "keys_per_round," << kpr << '\n';
  }
  return kOk;
}

// --- network ----------------------------------------------------------------

struct NetOptions {
  std::string mode = "plain";
  std::string scheme = "awr";
  unsigned tag_bits = 64;
  std::uint32_t max_blocks = 1024;
  std::string key_file;
  std::optional<std::uint64_t> key_seed;
  std::uint64_t key_offset = 0;
  std::uint64_t key_count = 1024;
  std::uint32_t timeout_ms = 10000;
};

awr::net::SessionConfig session_config(const NetOptions& o, awr::net::Role role) {
  awr::net::SessionConfig c;
  c.role = role;
  c.mode = awr::parse_mode(o.mode);
  c.scheme = awr::parse_scheme(o.scheme);
  c.family = awr::FamilyParams::polynomial(o.tag_bits, o.max_blocks);
  c.key_file = o.key_file;
  c.timeout = std::chrono::milliseconds(o.timeout_ms);
  return c;
}

/// Pool from --key-file or --key-seed, skipping the first --key-offset keys.
awr::KeyPool make_pool(const NetOptions& o, const awr::net::SessionConfig& c) {
  std::vector<awr::AuthKey> keys;
  if (!o.key_file.empty()) {
    keys = awr::read_key_file(c.family, o.key_file);
  } else if (o.key_seed) {
    awr::SeededKeySource source(c.family, *o.key_seed);
    for (std::uint64_t i = 0; i < o.key_offset + o.key_count; ++i) keys.push_back(source.next());
  } else {
    throw Error(ErrorCode::InvalidArgument, "one of --key-file or --key-seed is required");
  }
  if (o.key_offset > keys.size()) throw Error(ErrorCode::PoolExhausted, "key offset beyond the key material");
  keys.erase(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(o.key_offset));
  return awr::pool_from_keys(c.family, keys);
}

void add_net_options(CLI::App* app, NetOptions& o) {
  app->add_option("--mode", o.mode, "plain or hidden")->capture_default_str();
  app->add_option("--scheme", o.scheme, "awr or straightforward")->capture_default_str();
  app->add_option("--tag-bits", o.tag_bits, "tag width in bits")->capture_default_str();
  app->add_option("--max-blocks", o.max_blocks, "maximum message length in blocks")->capture_default_str();
  app->add_option("--key-file", o.key_file, "binary file of concatenated keys");
  app->add_option("--key-seed", o.key_seed, "derive keys from this seed instead of a key file");
  app->add_option("--key-offset", o.key_offset, "skip this many keys (already consumed)")->capture_default_str();
  app->add_option("--key-count", o.key_count, "keys to derive with --key-seed")->capture_default_str();
  app->add_option("--timeout-ms", o.timeout_ms, "per-frame timeout")->capture_default_str();
}

int verdict_exit(awr::Verdict mine) {
  return mine == awr::Verdict::Accepted ? kOk : kRejected;
}

void emit_outcome(const Globals& g, const awr::RoundOutcome& o, std::uint64_t index) {
  Sink out(g);
  if (out.json_mode()) {
    out.flush_json(to_json(index, o));
  } else {
    out.csv() << awr::kRoundCsvHeader << '\n';
    awr::write_csv_row(out.csv(), index, o);
  }
}

int cmd_serve(const Globals& g, const NetOptions& o, const std::string& listen, std::uint64_t rounds) {
  const auto config = session_config(o, awr::net::Role::Responder);
  auto pool = make_pool(o, config);
  awr::net::Listener listener(awr::net::Address::parse(listen));
  std::cerr << "listening on " << listener.address().str() << std::endl;
  Sink out(g);
  json rows = json::array();
  if (!out.json_mode()) out.csv() << awr::kRoundCsvHeader << '\n';
  int code = kOk;
  for (std::uint64_t i = 0; i < rounds; ++i) {
    auto conn = listener.accept(std::chrono::milliseconds(std::max<std::uint32_t>(o.timeout_ms, 60000)));
    const auto outcome = awr::net::run_responder(config, pool, conn);
    if (outcome.bob != awr::Verdict::Accepted) code = kRejected;
    if (out.json_mode()) {
      rows.push_back(to_json(i, outcome));
    } else {
      awr::write_csv_row(out.csv(), i, outcome);
    }
  }
  if (out.json_mode()) out.flush_json(rows);
  return code;
}

int cmd_connect(const Globals& g, const NetOptions& o, const std::string& peer, const std::string& transcript,
                const std::string& transcript_file) {
  const auto config = session_config(o, awr::net::Role::Initiator);
  auto pool = make_pool(o, config);
  std::vector<std::uint8_t> bytes(transcript.begin(), transcript.end());
  if (!transcript_file.empty()) {
    std::ifstream in(transcript_file, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open transcript file " + transcript_file);
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const auto outcome = awr::net::run_initiator(config, pool, bytes, awr::net::Address::parse(peer));
  emit_outcome(g, outcome, 0);
  return verdict_exit(outcome.alice);
}

int cmd_proxy(const std::string& listen, const std::string& forward, const std::string& rule_name,
              const NetOptions& o, std::uint64_t seed, std::uint64_t connections) {
  awr::net::FrameRule rule;
  if (rule_name == "identity") {
    rule = awr::net::rules::identity();
  } else if (rule_name == "flip-tag") {
    rule = awr::net::rules::flip_tag_bit();
  } else if (rule_name == "flip-transcript") {
    rule = awr::net::rules::flip_transcript_bit();
  } else if (rule_name == "drop-response") {
    rule = awr::net::rules::drop_response();
  } else if (rule_name == "random-response") {
    rule = awr::net::rules::replace_response_random_key(awr::FamilyParams::polynomial(o.tag_bits, o.max_blocks), seed);
  } else {
    throw Error(ErrorCode::ParseError, "unknown proxy rule '" + rule_name + "'");
  }
  awr::net::TamperProxy proxy(awr::net::Address::parse(listen), awr::net::Address::parse(forward), rule);
  std::cerr << "proxy on " << proxy.address().str() << " -> " << forward << std::endl;
  proxy.serve(connections, std::chrono::milliseconds(std::max<std::uint32_t>(o.timeout_ms, 60000)));
  return kOk;
}

int cmd_keygen(const Globals& g, unsigned tag_bits, std::uint64_t count) {
  const auto p = awr::FamilyParams::polynomial(tag_bits, 1);
  awr::SeededKeySource source(p, g.seed);
  std::vector<awr::AuthKey> keys;
  for (std::uint64_t i = 0; i < count; ++i) keys.push_back(source.next());
  if (g.output == "-" || g.output.empty()) throw Error(ErrorCode::InvalidArgument, "keygen needs --output");
  awr::write_key_file(p, g.output, keys);
  return kOk;
}

awr::BigInt parse_integer(const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::ParseError, "expected a decimal integer, got '" + text + "'");
  }
  return awr::BigInt(text);
}

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::SpaceTooLarge:
      return kGuard;
    case ErrorCode::Timeout:
    case ErrorCode::TransportError:
    case ErrorCode::FrameMalformed:
    case ErrorCode::ConfigMismatch:
    case ErrorCode::PoolExhausted:
      return kTransport;
    default:
      return kGuard;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Authentication-with-response toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--output,-o", g.output, "output file ('-' for stdout)")->capture_default_str();
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  unsigned tag_bits = 2;
  std::uint32_t max_blocks = 1;

  auto* check = app.add_subcommand("check-asu2", "exhaustively check the two ASU2 conditions");
  check->add_option("--tag-bits", tag_bits)->required();
  check->add_option("--max-blocks", max_blocks)->required();

  std::string attack_kind = "impersonation", attack_mode = "auto";
  std::uint64_t trials = 1000000;
  auto* attack = app.add_subcommand("attack", "estimate an attack's success rate against its bound");
  attack->add_option("--kind", attack_kind,
                     "impersonation | substitution | substitution-consistent | response-forge | response-forge-blind")
      ->capture_default_str();
  attack->add_option("--tag-bits", tag_bits)->required();
  attack->add_option("--max-blocks", max_blocks)->capture_default_str();
  attack->add_option("--trials", trials)->capture_default_str();
  attack->add_option("--mode", attack_mode, "auto | exhaustive | sampled")->capture_default_str();

  std::uint32_t msg_space = 4;
  std::vector<std::string> key_dists{"uniform"};
  auto* uc = app.add_subcommand("uc-check", "exact real-vs-ideal distance search against the theorem bound");
  uc->add_option("--tag-bits", tag_bits)->capture_default_str();
  uc->add_option("--max-blocks", max_blocks)->capture_default_str();
  uc->add_option("--msg-space", msg_space)->capture_default_str();
  uc->add_option("--key-dist", key_dists, "uniform | point_shift:<num/den> | leak_bits:<n> (repeatable)")
      ->capture_default_str();

  awr::budget::BudgetParams bp;
  bp.eps1 = 1e-10;
  bp.eps = 1e-12;
  bp.rounds = 64;
  unsigned budget_tag_bits = 32;
  std::string tag_space_text, key_space_text;
  std::string budget_scheme = "both";
  std::optional<double> target;
  auto* budget = app.add_subcommand("budget", "multi-round security budget tables");
  budget->add_option("--eps1", bp.eps1)->capture_default_str();
  budget->add_option("--eps", bp.eps)->capture_default_str();
  budget->add_option("--tag-bits", budget_tag_bits, "|T| = 2^tag_bits and |K| = |T|^2 unless given")
      ->capture_default_str();
  budget->add_option("--tag-space", tag_space_text, "|T| as a decimal integer");
  budget->add_option("--key-space", key_space_text, "|K| as a decimal integer");
  budget->add_option("--rounds", bp.rounds)->capture_default_str();
  budget->add_option("--initial-perfectness", bp.initial_key_perfectness)->capture_default_str();
  budget->add_option("--scheme", budget_scheme, "awr | straightforward | both")->capture_default_str();
  budget->add_option("--target", target, "also report the largest round within this security level");

  awr::SimulationConfig sim;
  std::string sim_scheme = "awr", sim_mode = "plain", sim_tamper = "none";
  unsigned sim_tag_bits = 64;
  std::uint32_t sim_blocks = 1024;
  auto* simulate = app.add_subcommand("simulate", "run in-process rounds with pool refills");
  simulate->add_option("--rounds", sim.rounds)->capture_default_str();
  simulate->add_option("--scheme", sim_scheme)->capture_default_str();
  simulate->add_option("--mode", sim_mode)->capture_default_str();
  simulate->add_option("--tamper", sim_tamper, "none | <flip-tag|flip-transcript|forge-response|drop-response>:<p>")
      ->capture_default_str();
  simulate->add_option("--tag-bits", sim_tag_bits)->capture_default_str();
  simulate->add_option("--max-blocks", sim_blocks)->capture_default_str();
  simulate->add_option("--transcript-bytes", sim.transcript_bytes)->capture_default_str();

  NetOptions net;
  std::string listen = "127.0.0.1:7878", peer = "127.0.0.1:7878", forward, transcript, transcript_file,
              rule = "identity";
  std::uint64_t serve_rounds = 1, connections = 1;
  auto* serve = app.add_subcommand("serve", "responder (Bob) endpoint");
  add_net_options(serve, net);
  serve->add_option("--listen", listen)->capture_default_str();
  serve->add_option("--rounds", serve_rounds, "connections to serve")->capture_default_str();

  auto* connect = app.add_subcommand("connect", "initiator (Alice) endpoint");
  add_net_options(connect, net);
  connect->add_option("--peer", peer)->capture_default_str();
  connect->add_option("--transcript", transcript, "transcript bytes as text");
  connect->add_option("--transcript-file", transcript_file, "transcript bytes from a file");

  auto* proxy = app.add_subcommand("proxy", "frame-level man-in-the-middle relay");
  add_net_options(proxy, net);
  proxy->add_option("--listen", listen)->capture_default_str();
  proxy->add_option("--forward", forward)->required();
  proxy->add_option("--rule", rule, "identity | flip-tag | flip-transcript | drop-response | random-response")
      ->capture_default_str();
  proxy->add_option("--connections", connections)->capture_default_str();

  std::uint64_t key_count = 1024;
  unsigned key_bits = 64;
  auto* keygen = app.add_subcommand("keygen", "write a seeded binary key file (needs --output)");
  keygen->add_option("--tag-bits", key_bits)->capture_default_str();
  keygen->add_option("--count", key_count)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kGuard;
  }

  try {
    if (*check) return cmd_check_asu2(g, tag_bits, max_blocks);
    if (*attack) return cmd_attack(g, attack_kind, tag_bits, max_blocks, trials, attack_mode);
    if (*uc) return cmd_uc_check(g, tag_bits, max_blocks, msg_space, key_dists);
    if (*budget) {
      bp.tag_space = tag_space_text.empty() ? awr::pow2(budget_tag_bits) : parse_integer(tag_space_text);
      bp.key_space = key_space_text.empty() ? bp.tag_space * bp.tag_space : parse_integer(key_space_text);
      return cmd_budget(g, bp, budget_scheme, target);
    }
    if (*simulate) {
      sim.scheme = awr::parse_scheme(sim_scheme);
      sim.mode = awr::parse_mode(sim_mode);
      sim.tamper = awr::TamperSpec::parse(sim_tamper);
      sim.family = awr::FamilyParams::polynomial(sim_tag_bits, sim_blocks);
      return cmd_simulate(g, sim);
    }
    if (*serve) return cmd_serve(g, net, listen, serve_rounds);
    if (*connect) return cmd_connect(g, net, peer, transcript, transcript_file);
    if (*proxy) return cmd_proxy(listen, forward, rule, net, g.seed, connections);
    if (*keygen) return cmd_keygen(g, key_bits, key_count);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kGuard;
  }
  return kOk;
}
