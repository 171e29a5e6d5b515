#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bcac/codec.hpp"
#include "bcac/error.hpp"
#include "bcac/keying.hpp"
#include "bcac/multicast.hpp"
#include "bcac/wrap.hpp"

namespace py = pybind11;
using namespace bcac;

namespace {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidAlphabet: return "invalid-alphabet";
    case ErrorKind::Model: return "model";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Config: return "config";
    case ErrorKind::Format: return "format";
    case ErrorKind::Key: return "key";
    case ErrorKind::Decode: return "decode";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::Wrap: return "wrap";
  }
  return "unknown";
}

py::object to_int(const BigInt& v) { return py::module_::import("builtins").attr("int")(v.get_str()); }

py::object to_fraction(const Rational& v) {
  return py::module_::import("fractions").attr("Fraction")(v.get_str());
}

Rational from_fraction(const py::handle& obj) {
  Rational r(py::str(obj).cast<std::string>());
  r.canonicalize();
  return r;
}

Seed to_seed(const py::handle& obj) {
  if (py::isinstance<py::int_>(obj)) return Seed::from_u64(obj.cast<std::uint64_t>());
  return Seed::parse(obj.cast<std::string>());
}

py::object json_to_py(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

EncryptionKey key_of(const std::string& digits, int tail) {
  return EncryptionKey::from_digits(digits, MapMode(tail));
}

py::bytes as_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Binary chaotic arithmetic coding: native core";

  static py::exception<Error> exc(m, "BcacError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = exc;
      PyErr_SetObject(err.ptr(), py::make_tuple(kind_name(e.kind()), e.what()).ptr());
    }
  });

  m.def("keyspace_size", [](long n) { return to_int(keyspace_size(n)); });
  m.def("key_bits", &key_bits);

  m.def("bcac_params", [](int mode, const py::object& p) {
    const auto prm = bcac_params(MapMode(mode), from_fraction(p));
    py::dict d;
    const std::pair<const char*, const Rational*> fields[] = {
        {"m1", &prm.m1}, {"b1", &prm.b1}, {"m2", &prm.m2}, {"b2", &prm.b2}, {"n1", &prm.n1},
        {"c1", &prm.c1}, {"n2", &prm.n2}, {"c2", &prm.c2}, {"i1", &prm.i1}, {"i2", &prm.i2},
        {"i3", &prm.i3}, {"i4", &prm.i4}, {"k", &prm.k}};
    for (const auto& [name, v] : fields) d[name] = to_fraction(*v);
    return d;
  }, py::arg("mode"), py::arg("p"));

  m.def("twin_mode", [](int mode, int bit) { return twin_mode(MapMode(mode), bit).digit(); },
        py::arg("mode"), py::arg("bit"));

  m.def("keygen", [](const py::object& seed, std::size_t length, const std::string& modes, int tail) {
    return keygen(to_seed(seed), length, ModeSet::parse(modes), MapMode(tail)).digits();
  }, py::arg("seed"), py::arg("m"), py::arg("modes") = "12345678", py::arg("tail") = 1);

  m.def("encode", [](const std::string& bits, std::uint32_t p_num, const std::string& key,
                     bool exact, int precision, int tail) {
    const Bits msg = bits_from_string(bits);
    const EncryptionKey k = key_of(key, tail);
    const Codeword cw = exact ? encode_exact(msg, Probability(p_num), k)
                              : encode_stream(msg, Probability(p_num), k, precision);
    return as_bytes(cw.serialize());
  }, py::arg("bits"), py::arg("p_num"), py::arg("key") = "", py::arg("exact") = false,
        py::arg("precision") = kDefaultPrecision, py::arg("tail") = 1);

  m.def("decode", [](const py::bytes& data, const std::string& key, bool exact, int precision,
                     int tail) {
    const Codeword cw = Codeword::parse(from_bytes(data));
    const EncryptionKey k = key_of(key, tail);
    return bits_to_string(exact ? decode_exact(cw, k) : decode_stream(cw, k, precision));
  }, py::arg("data"), py::arg("key") = "", py::arg("exact") = false,
        py::arg("precision") = kDefaultPrecision, py::arg("tail") = 1);

  m.def("header", [](const py::bytes& data) {
    const auto h = Codeword::parse(from_bytes(data)).header;
    py::dict d;
    d["version"] = h.version;
    d["p_num"] = h.p_num;
    d["m_len"] = h.m_len;
    d["n_bits"] = h.n_bits;
    d["payload_len_bits"] = h.payload_len_bits;
    return d;
  });

  m.def("code_length_bound", [](const std::string& bits, std::uint32_t p_num) {
    const auto b = code_length_bound(bits_from_string(bits), Probability(p_num));
    return py::make_tuple(b.lower, b.upper);
  }, py::arg("bits"), py::arg("p_num"));

  m.def("pool", [](const std::string& key, const std::string& bits, int tail) {
    const auto pool = derive_pool(key_of(key, tail), bits_from_string(bits));
    std::vector<std::string> out;
    for (const auto& k : pool.enumerate()) out.push_back(k.digits());
    return out;
  }, py::arg("key"), py::arg("bits"), py::arg("tail") = 1);

  m.def("is_pool_member", [](const std::string& key, const std::string& bits,
                             const std::string& candidate, int tail) {
    const auto pool = derive_pool(key_of(key, tail), bits_from_string(bits));
    return is_pool_member(pool, key_of(candidate, tail));
  }, py::arg("key"), py::arg("bits"), py::arg("candidate"), py::arg("tail") = 1);

  m.def("pool_math", [](std::size_t length, std::size_t alphabet) {
    const auto pm = pool_math(length, alphabet);
    return py::make_tuple(to_int(pm.valid), to_int(pm.total), to_fraction(pm.guess_prob));
  }, py::arg("m"), py::arg("alphabet") = MapMode::kCount);

  m.def("wrap_roundtrip", [](const std::string& key, const std::string& scheme,
                             const py::object& seed) {
    const auto& sc = scheme_by_name(scheme);
    const auto r = sc.make_recipient("py", to_seed(seed));
    const auto w = wrap_key(EncryptionKey::from_digits(key), r.pub, sc);
    return py::make_tuple(unwrap_key(w, r, sc).digits(), as_bytes(w.to_blob()));
  }, py::arg("key"), py::arg("scheme") = "SEALBOX", py::arg("seed") = 0);

  m.def("simulate", [](std::size_t users, std::size_t n, std::size_t length, std::uint32_t p_num,
                       const py::object& seed, std::size_t collude_k, int precision,
                       const std::string& scheme, const std::string& modes) {
    SimConfig cfg;
    cfg.users = users;
    cfg.n = n;
    cfg.m = length;
    cfg.p = Probability(p_num);
    cfg.seed = to_seed(seed);
    cfg.collude_k = collude_k;
    cfg.precision = precision;
    cfg.scheme = scheme;
    cfg.modes = ModeSet::parse(modes);
    nlohmann::ordered_json report;
    {
      py::gil_scoped_release release;
      report = to_json(simulate_multicast(cfg));
    }
    return json_to_py(report);
  }, py::arg("users") = 8, py::arg("n") = 1000, py::arg("m") = 128, py::arg("p_num") = 58982,
        py::arg("seed") = 0, py::arg("collude_k") = 0, py::arg("precision") = kDefaultPrecision,
        py::arg("scheme") = "SEALBOX", py::arg("modes") = "12345678");

  m.def("trace_experiment", [](std::size_t users, std::size_t n, std::size_t length,
                               std::size_t collude_k, std::size_t trials, const py::object& seed) {
    SimConfig cfg;
    cfg.users = users;
    cfg.n = n;
    cfg.m = length;
    cfg.collude_k = collude_k;
    cfg.trials = trials;
    cfg.seed = to_seed(seed);
    return json_to_py(to_json(run_trace_experiment(cfg)));
  }, py::arg("users") = 4, py::arg("n") = 64, py::arg("m") = 8, py::arg("collude_k") = 2,
        py::arg("trials") = 100, py::arg("seed") = 0);
}
