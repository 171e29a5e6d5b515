// bcac command-line front end.
//
// Exit status: 0 success, 2 format error, 3 key error, 4 capacity error,
// 1 anything else (usage, configuration, I/O).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcac/codec.hpp"
#include "bcac/error.hpp"
#include "bcac/keying.hpp"
#include "bcac/multicast.hpp"
#include "bcac/wrap.hpp"

using json = nlohmann::ordered_json;
using namespace bcac;

namespace {

// ---------------------------------------------------------------------------
// I/O helpers

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Config, "cannot read " + path);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  if (path == "-") {
    std::cout.write(reinterpret_cast<const char*>(bytes.data()),
                    static_cast<std::streamsize>(bytes.size()));
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::Config, "cannot write " + path);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::string& path, const std::string& text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// A file read bitwise MSB-first, or ASCII '0'/'1' when `text_bits` is set.
Bits read_message(const std::string& path, bool text_bits) {
  const auto bytes = read_bytes(path);
  if (text_bits) return bits_from_string(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return unpack_bits(bytes, bytes.size() * 8);
}

/// Digit string, key line, or path to a key file.
EncryptionKey load_key(const std::string& spec, MapMode tail) {
  if (spec.rfind("CACKEY", 0) == 0) return EncryptionKey::from_key_line(spec);
  if (!spec.empty() && spec.find_first_not_of("12345678") == std::string::npos) {
    return EncryptionKey::from_digits(spec, tail);
  }
  if (spec == "-" || spec.empty()) return EncryptionKey({}, tail);
  std::ifstream is(spec);
  if (!is) fail(ErrorKind::Key, "key is neither digits nor a readable key file: " + spec);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return EncryptionKey::from_key_line(line);
  }
  fail(ErrorKind::Key, "key file " + spec + " is empty");
}

/// "0.9", "9/10" or "1e-1" style decimal, exactly.
Rational parse_rational(const std::string& text) {
  try {
    if (text.find('/') != std::string::npos) {
      Rational r(text);
      r.canonicalize();
      return r;
    }
    std::string digits;
    long scale = 0;
    bool seen_dot = false;
    std::size_t i = 0;
    for (; i < text.size() && text[i] != 'e' && text[i] != 'E'; ++i) {
      const char c = text[i];
      if (c == '.') {
        if (seen_dot) throw std::invalid_argument("dot");
        seen_dot = true;
      } else if (c >= '0' && c <= '9') {
        digits.push_back(c);
        if (seen_dot) --scale;
      } else {
        throw std::invalid_argument("char");
      }
    }
    if (i < text.size()) scale += std::stol(text.substr(i + 1));
    if (digits.empty()) throw std::invalid_argument("empty");
    Rational r{BigInt(digits, 10)};
    BigInt ten;
    mpz_ui_pow_ui(ten.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
    r = scale < 0 ? Rational(r / ten) : Rational(r * ten);
    r.canonicalize();
    return r;
  } catch (const std::exception&) {
    fail(ErrorKind::Config, "cannot parse probability '" + text + "'");
  }
}

Probability measured_probability(const Bits& bits) {
  if (bits.empty()) return Probability(Probability::kScale / 2);
  const auto zeros = static_cast<long>(std::count(bits.begin(), bits.end(), 0));
  const auto n = static_cast<long>(bits.size());
  if (zeros == 0) return Probability(1);
  if (zeros == n) return Probability(Probability::kScale - 1);
  return Probability::from_rational(Rational(zeros, n));
}

struct ProbOpts {
  std::string p;
  std::optional<std::uint32_t> p_num;

  void add(CLI::App* app, const char* default_p) {
    p = default_p;
    app->add_option("--p", p, "P('0') as a decimal, a fraction, or 'auto'")->capture_default_str();
    app->add_option("--p-num", p_num, "P('0') as an integer numerator over 65536");
  }

  Probability resolve(const Bits* message) const {
    if (p_num) return Probability(*p_num);
    if (p == "auto") {
      if (!message) fail(ErrorKind::Config, "--p auto needs an input message");
      return measured_probability(*message);
    }
    return Probability::from_rational(parse_rational(p));
  }
};

struct CoderOpts {
  bool exact = false;
  int precision = kDefaultPrecision;

  void add(CLI::App* app) {
    app->add_flag("--exact", exact, "use the exact reference coder");
    app->add_option("--precision", precision, "stream coder register width P in bits")
        ->capture_default_str();
  }
  std::string name() const { return exact ? "exact" : "stream/" + std::to_string(precision); }
};

json pool_json(const PoolMath& pm) { return to_json(pm); }

void emit(bool as_json, const json& j, const std::string& human) {
  if (as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << human;
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct EncodeCmd {
  std::string in, out = "-", key, key_out, seed, modes = "12345678";
  std::size_t m = 0;
  int tail = 1;
  bool text_bits = false, as_json = false;
  ProbOpts prob;
  CoderOpts coder;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("encode", "compress and encrypt a file");
    c->add_option("--in", in, "input file (bits MSB-first)")->required();
    c->add_option("--out", out, "codeword file, '-' for stdout")->capture_default_str();
    c->add_option("--key", key, "key digits, key line or key file");
    c->add_option("--m", m, "encrypted prefix length when generating a key");
    c->add_option("--seed", seed, "seed for key generation (64 hex digits or integer)");
    c->add_option("--modes", modes, "allowed modes for key generation")->capture_default_str();
    c->add_option("--tail", tail, "public tail mode")->capture_default_str();
    c->add_option("--key-out", key_out, "write the key used to this file");
    c->add_flag("--text-bits", text_bits, "input is ASCII 0/1 text");
    c->add_flag("--json", as_json, "machine-readable summary");
    prob.add(c, "auto");
    coder.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    const Bits msg = read_message(in, text_bits);
    const Probability p = prob.resolve(&msg);
    EncryptionKey k;
    if (!key.empty()) {
      k = load_key(key, MapMode(tail));
    } else if (m > 0) {
      if (seed.empty()) fail(ErrorKind::Config, "generating a key needs --seed");
      k = keygen(Seed::parse(seed), m, ModeSet::parse(modes), MapMode(tail));
    } else {
      k = EncryptionKey({}, MapMode(tail));
    }
    const Codeword cw = coder.exact ? encode_exact(msg, p, k) : encode_stream(msg, p, k, coder.precision);
    if (!key_out.empty()) write_text(key_out, k.to_key_line() + "\n");
    write_bytes(out, cw.serialize());

    const auto bound = code_length_bound(msg, p);
    const auto pm = pool_math(k.size());
    json j;
    j["n_bits"] = msg.size();
    j["m"] = k.size();
    j["p_num"] = p.num();
    j["coder"] = coder.name();
    j["payload_bits"] = cw.payload.size();
    j["length_bound"] = {bound.lower, bound.upper};
    j["entropy_bits"] = binary_entropy(p) * static_cast<double>(msg.size());
    j["pool"] = pool_json(pm);
    if (key_out.empty() && key.empty()) j["key"] = k.to_key_line();

    std::ostringstream h;
    h << "encoded " << msg.size() << " bits -> " << cw.payload.size() << " payload bits ("
      << coder.name() << ", p=" << p.num() << "/65536)\n"
      << "length bound [" << bound.lower << ", " << bound.upper << "], entropy "
      << binary_entropy(p) * static_cast<double>(msg.size()) << " bits\n"
      << "pool: " << pm.valid.get_str() << " valid keys of " << pm.total.get_str() << "\n";
    if (key_out.empty() && key.empty()) h << k.to_key_line() << "\n";
    // Keep stdout clean when the codeword itself goes there.
    if (out == "-") {
      std::cerr << (as_json ? j.dump(2) + "\n" : h.str());
    } else {
      emit(as_json, j, h.str());
    }
  }
};

struct DecodeCmd {
  std::string in, out = "-", key;
  int tail = 1;
  bool text_bits = false, as_json = false;
  CoderOpts coder;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("decode", "decode a codeword file");
    c->add_option("--in", in, "codeword file")->required();
    c->add_option("--key", key, "key digits, key line or key file")->required();
    c->add_option("--out", out, "plaintext output, '-' for stdout")->capture_default_str();
    c->add_option("--tail", tail, "public tail mode for digit-string keys")->capture_default_str();
    c->add_flag("--text-bits", text_bits, "write ASCII 0/1 text");
    c->add_flag("--json", as_json, "machine-readable summary on stderr");
    coder.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    const Codeword cw = Codeword::parse(read_bytes(in));
    const EncryptionKey k = load_key(key, MapMode(tail));
    const Bits bits = coder.exact ? decode_exact(cw, k) : decode_stream(cw, k, coder.precision);
    if (text_bits) {
      write_text(out, bits_to_string(bits) + "\n");
    } else {
      write_bytes(out, pack_bits(bits));
    }
    json j{{"n_bits", bits.size()}, {"m", cw.header.m_len}, {"coder", coder.name()}};
    std::ostream& info = out == "-" ? std::cerr : std::cout;
    if (as_json) {
      info << j.dump(2) << "\n";
    } else {
      info << "decoded " << bits.size() << " bits\n";
    }
  }
};

struct KeygenCmd {
  std::string seed, out, modes = "12345678";
  std::size_t m = 0;
  int tail = 1;
  bool as_json = false;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("keygen", "derive a key from a seed");
    c->add_option("--seed", seed, "64 hex digits or an integer")->required();
    c->add_option("--m", m, "number of keyed positions")->required();
    c->add_option("--modes", modes, "allowed modes, e.g. 1,5")->capture_default_str();
    c->add_option("--tail", tail, "public tail mode")->capture_default_str();
    c->add_option("--out", out, "write the key line to this file");
    c->add_flag("--json", as_json, "machine-readable output");
    c->callback([this] { run(); });
  }

  void run() {
    const ModeSet set = ModeSet::parse(modes);
    const EncryptionKey k = keygen(Seed::parse(seed), m, set, MapMode(tail));
    if (!out.empty()) write_text(out, k.to_key_line() + "\n");
    json j{{"m", k.size()}, {"tail", k.tail().digit()}, {"key", k.digits()},
           {"line", k.to_key_line()}, {"pool", pool_json(pool_math(m, set.size()))}};
    emit(as_json, j, k.to_key_line() + "\n");
  }
};

/// Message prefix for pool-related commands: --bits literal or --in file.
Bits prefix_bits(const std::string& bits, const std::string& in, bool text_bits, std::size_t m) {
  Bits msg;
  if (!bits.empty()) {
    msg = bits_from_string(bits);
  } else if (!in.empty()) {
    msg = read_message(in, text_bits);
  } else {
    fail(ErrorKind::Config, "need the plaintext via --bits or --in");
  }
  if (msg.size() < m) fail(ErrorKind::Key, "plaintext is shorter than the key");
  msg.resize(m);
  return msg;
}

struct PoolCmd {
  std::string key, bits, in;
  int tail = 1;
  bool text_bits = false, enumerate = false, as_json = false;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("pool", "show the pool of keys equivalent to a key");
    c->add_option("--key", key, "original key")->required();
    c->add_option("--bits", bits, "plaintext as 0/1 text");
    c->add_option("--in", in, "plaintext file");
    c->add_option("--tail", tail, "public tail mode")->capture_default_str();
    c->add_flag("--text-bits", text_bits, "--in holds ASCII 0/1 text");
    c->add_flag("--enumerate", enumerate, "list every member (M <= 16)");
    c->add_flag("--json", as_json, "machine-readable output");
    c->callback([this] { run(); });
  }

  void run() {
    const EncryptionKey k = load_key(key, MapMode(tail));
    const auto pool = derive_pool(k, prefix_bits(bits, in, text_bits, k.size()));
    const auto pm = pool_math(k.size());
    json j;
    j["m"] = k.size();
    auto& pairs = j["pairs"] = json::array();
    for (const auto& [a, b] : pool.pairs()) pairs.push_back({a.digit(), b.digit()});
    j["pool"] = pool_json(pm);
    std::ostringstream h;
    h << "pool: " << pm.valid.get_str() << " of " << pm.total.get_str() << " keys (guess probability "
      << pm.guess_prob.get_str() << ")\n";
    if (enumerate) {
      auto& keys = j["keys"] = json::array();
      for (const auto& member : pool.enumerate()) {
        keys.push_back(member.digits());
        h << member.digits() << "\n";
      }
    }
    emit(as_json, j, h.str());
  }
};

struct IssueCmd {
  std::string key, bits, in, user, ledger, session = "default", seed, out, scheme, blob_out;
  int tail = 1;
  bool text_bits = false, as_json = false;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("issue", "issue a pool key to a user and record it");
    c->add_option("--key", key, "original key")->required();
    c->add_option("--bits", bits, "plaintext as 0/1 text");
    c->add_option("--in", in, "plaintext file");
    c->add_option("--user", user, "recipient id")->required();
    c->add_option("--ledger", ledger, "JSON-lines ledger file")->required();
    c->add_option("--session", session, "session id")->capture_default_str();
    c->add_option("--seed", seed, "issuance seed")->required();
    c->add_option("--tail", tail, "public tail mode")->capture_default_str();
    c->add_option("--out", out, "write the issued key line here");
    c->add_option("--scheme", scheme, "wrap the key with NULL-TEST or SEALBOX");
    c->add_option("--blob-out", blob_out, "wrapped-key blob output");
    c->add_flag("--text-bits", text_bits, "--in holds ASCII 0/1 text");
    c->add_flag("--json", as_json, "machine-readable output");
    c->callback([this] { run(); });
  }

  void run() {
    const EncryptionKey k = load_key(key, MapMode(tail));
    const auto pool = derive_pool(k, prefix_bits(bits, in, text_bits, k.size()));
    KeyLedger led = KeyLedger::load_jsonl(ledger, session, pool);
    const std::size_t before = led.size();
    const Seed s = Seed::parse(seed);
    const EncryptionKey issued = sample_user_key(pool, user, led, s);
    led.append_jsonl(ledger, before);
    if (!out.empty()) write_text(out, issued.to_key_line() + "\n");
    json j{{"session", session}, {"user", user}, {"key", issued.digits()},
           {"new", led.size() > before}};
    if (!scheme.empty()) {
      const auto& sc = scheme_by_name(scheme);
      const auto recipient = sc.make_recipient(user, s);
      const auto blob = wrap_key(issued, recipient.pub, sc).to_blob();
      if (!blob_out.empty()) write_bytes(blob_out, blob);
      j["wrapped_bytes"] = blob.size();
    }
    emit(as_json, j, user + " " + issued.to_key_line() + "\n");
  }
};

struct SimOpts {
  std::size_t users = 8, n = 1000, m = 128, collude_k = 0, trials = 100;
  std::string seed = "0", modes = "12345678", scheme = "SEALBOX";
  ProbOpts prob;
  CoderOpts coder;

  void add(CLI::App* c) {
    c->add_option("--users", users, "number of recipients")->capture_default_str();
    c->add_option("--n", n, "message length in bits")->capture_default_str();
    c->add_option("--m", m, "encrypted prefix length")->capture_default_str();
    c->add_option("--seed", seed, "base seed")->capture_default_str();
    c->add_option("--modes", modes, "allowed modes for the original key")->capture_default_str();
    c->add_option("--scheme", scheme, "key wrapping scheme")->capture_default_str();
    c->add_option("--collude-k", collude_k, "collusion group size")->capture_default_str();
    c->add_option("--trials", trials, "Monte-Carlo trials")->capture_default_str();
    prob.add(c, "0.9");
    coder.add(c);
  }

  SimConfig config() const {
    SimConfig cfg;
    cfg.users = users;
    cfg.n = n;
    cfg.m = m;
    cfg.p = prob.resolve(nullptr);
    cfg.seed = Seed::parse(seed);
    cfg.modes = ModeSet::parse(modes);
    cfg.collude_k = collude_k;
    cfg.trials = trials;
    cfg.scheme = scheme;
    cfg.precision = coder.exact ? 0 : coder.precision;
    return cfg;
  }
};

struct SimCmd {
  SimOpts opts;
  std::string out;
  bool as_json = false;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand("sim", "simulate one multicast session");
    opts.add(c);
    c->add_option("--out", out, "also write the JSON report here");
    c->add_flag("--json", as_json, "machine-readable report");
    c->callback([this] { run(); });
  }

  void run() {
    const SimConfig cfg = opts.config();
    const SimReport r = simulate_multicast(cfg);
    json j = to_json(r);
    if (cfg.collude_k >= 2) j["trace"] = to_json(run_trace_experiment(cfg));
    if (!out.empty()) write_text(out, j.dump(2) + "\n");
    std::ostringstream h;
    h << r.successes << "/" << r.users << " users decoded one " << r.ciphertext_bytes
      << "-byte stream (" << r.payload_bits << " payload bits, rate " << r.rate << ", H "
      << r.entropy << ")\n"
      << "key payload " << r.key_payload_bits_per_user << " bits/user, " << r.total_key_bits
      << " total, wrap overhead " << r.wrap_overhead_bytes << " bytes (" << r.scheme << ")\n"
      << "identical ciphertext for all users: " << (r.single_ciphertext ? "yes" : "no") << "\n";
    if (r.brute_force) {
      h << "brute force: " << r.brute_force->valid.size() << " of " << r.brute_force->keyspace
        << " keys decode\n";
    }
    emit(as_json, j, h.str());
  }
};

struct TraceCmd {
  SimOpts opts;
  std::string leaked, ledger, session = "default", key, bits, in;
  int tail = 1;
  bool text_bits = false, as_json = false;

  void add(CLI::App& root) {
    auto* c = root.add_subcommand(
        "trace", "attribute a leaked key against a ledger, or run the tracing experiment");
    opts.add(c);
    c->add_option("--leaked", leaked, "leaked key to attribute");
    c->add_option("--ledger", ledger, "JSON-lines ledger file");
    c->add_option("--session", session, "session id")->capture_default_str();
    c->add_option("--key", key, "original session key");
    c->add_option("--bits", bits, "session plaintext as 0/1 text");
    c->add_option("--in", in, "session plaintext file");
    c->add_option("--tail", tail, "public tail mode")->capture_default_str();
    c->add_flag("--text-bits", text_bits, "--in holds ASCII 0/1 text");
    c->add_flag("--json", as_json, "machine-readable output");
    c->callback([this] { run(); });
  }

  void run() {
    if (leaked.empty()) {
      const TraceSummary s = run_trace_experiment(opts.config());
      std::ostringstream h;
      h << "leaks attributed: " << s.leak_attributed_correctly << "/" << s.trials << "\n"
        << "mixes: " << s.mix_trials << " trials, " << s.mix_collusion_suspected << " suspected, "
        << s.mix_attributed_to_colluder + s.mix_attributed_to_innocent
        << " equal an issued key, " << s.mix_misattributed << " misattributed\n"
        << "non-pool leaks reported unknown: " << s.non_pool_unknown << "/" << s.non_pool_trials
        << "\n";
      emit(as_json, to_json(s), h.str());
      return;
    }
    if (ledger.empty() || key.empty()) {
      fail(ErrorKind::Config, "attributing a leak needs --ledger and --key");
    }
    const EncryptionKey k = load_key(key, MapMode(tail));
    const auto pool = derive_pool(k, prefix_bits(bits, in, text_bits, k.size()));
    const KeyLedger led = KeyLedger::load_jsonl(ledger, session, pool);
    const TraceResult r = trace_key(load_key(leaked, MapMode(tail)), led);
    json j{{"verdict", std::string(to_string(r.verdict))}};
    j["user"] = r.user ? json(*r.user) : json(nullptr);
    emit(as_json, j, std::string(to_string(r.verdict)) + (r.user ? " " + *r.user : "") + "\n");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary chaotic arithmetic coding for multicast"};
  app.require_subcommand(1);
  EncodeCmd encode;
  DecodeCmd decode;
  KeygenCmd keygen_cmd;
  PoolCmd pool;
  IssueCmd issue;
  SimCmd sim;
  TraceCmd trace;
  encode.add(app);
  decode.add(app);
  keygen_cmd.add(app);
  pool.add(app);
  issue.add(app);
  sim.add(app);
  trace.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "bcac: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "bcac: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
