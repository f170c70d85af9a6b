// decoykit command-line front end: key generation, encode/decode for both
// ciphers, chaffing/winnowing over files or a loopback socket, OTP forgery
// and terminal lists, mimic generation, the unicity calculator, alphabet
// evolution, and the analysis harness.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 verification
// failure. Diagnostics go to stderr, data to the selected output.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <CLI11.hpp>

#include "decoykit/analysis.hpp"
#include "decoykit/bitflip.hpp"
#include "decoykit/bitmap.hpp"
#include "decoykit/bitstring.hpp"
#include "decoykit/equivocation.hpp"
#include "decoykit/evolve.hpp"
#include "decoykit/winnow.hpp"

namespace {

using decoykit::BitString;
using decoykit::RandomSource;
namespace bf = decoykit::bitflip;
namespace bm = decoykit::bitmap;
namespace eq = decoykit::equivocation;
namespace ev = decoykit::evolve;
namespace an = decoykit::analysis;
namespace wn = decoykit::winnow;

// exit-code-3 condition: an output failed its own re-check
struct VerificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RandomSource make_rng(const std::optional<std::uint64_t>& seed) {
    if (seed) return RandomSource(*seed);
    if (const char* env = std::getenv("DECOYKIT_SEED")) {
        try {
            return RandomSource(std::stoull(env));
        } catch (const std::exception&) {
            throw std::runtime_error("DECOYKIT_SEED is not a valid 64-bit seed: '" +
                                     std::string(env) + "'");
        }
    }
    return RandomSource();
}

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open input file '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& data) {
    if (path == "-") {
        std::cout.write(data.data(), static_cast<std::streamsize>(data.size()));
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) throw std::runtime_error("failed writing to '" + path + "'");
}

// text-message convention: one trailing newline is not part of the message
std::string read_text_message(const std::string& path) {
    std::string s = read_input(path);
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

std::vector<std::uint8_t> to_bytes(const std::string& s) {
    return {s.begin(), s.end()};
}

std::vector<std::string> read_lines(const std::string& path) {
    std::istringstream is(read_input(path));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(is, line)) out.push_back(line);
    return out;
}

bf::Alphabet load_bitflip_key(const std::string& path) {
    std::istringstream is(read_input(path));
    return bf::read_key(is);
}

bm::MapKey load_bitmap_key(const std::string& path) {
    std::istringstream is(read_input(path));
    return bm::read_key(is);
}

wn::WinnowKey load_winnow_key(const std::string& path) {
    std::istringstream is(read_input(path));
    return wn::read_key(is);
}

bf::EncodeMode parse_mode(const std::string& mode) {
    if (mode == "randomized") return bf::EncodeMode::randomized;
    if (mode == "degenerate") return bf::EncodeMode::degenerate;
    throw std::runtime_error("mode must be 'randomized' or 'degenerate'");
}

// ---- loopback socket convenience (no protocol of its own: the wire format
// bytes are streamed as-is) ----

struct Fd {
    int fd = -1;
    ~Fd() {
        if (fd >= 0) ::close(fd);
    }
};

std::string recv_all(int fd) {
    std::string data;
    char buf[4096];
    for (;;) {
        const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n < 0) throw std::runtime_error("socket read failed");
        if (n == 0) break;
        data.append(buf, static_cast<std::size_t>(n));
    }
    return data;
}

void send_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, 0);
        if (n <= 0) throw std::runtime_error("socket write failed");
        off += static_cast<std::size_t>(n);
    }
}

void send_to(const std::string& hostport, const std::string& data) {
    const auto colon = hostport.rfind(':');
    if (colon == std::string::npos) {
        throw std::runtime_error("--connect expects host:port, got '" + hostport + "'");
    }
    const std::string host = hostport.substr(0, colon);
    const std::string port = hostport.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
        throw std::runtime_error("cannot resolve '" + hostport + "'");
    }
    Fd sock;
    int err = -1;
    for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
        sock.fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
        if (sock.fd < 0) continue;
        err = ::connect(sock.fd, p->ai_addr, p->ai_addrlen);
        if (err == 0) break;
        ::close(sock.fd);
        sock.fd = -1;
    }
    ::freeaddrinfo(res);
    if (sock.fd < 0 || err != 0) {
        throw std::runtime_error("cannot connect to '" + hostport + "'");
    }
    send_all(sock.fd, data);
}

std::string receive_on(int port) {
    Fd server;
    server.fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (server.fd < 0) throw std::runtime_error("cannot create socket");
    const int one = 1;
    ::setsockopt(server.fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(server.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        throw std::runtime_error("cannot bind to loopback port " + std::to_string(port));
    }
    if (::listen(server.fd, 1) != 0) {
        throw std::runtime_error("cannot listen on port " + std::to_string(port));
    }
    Fd conn;
    conn.fd = ::accept(server.fd, nullptr, nullptr);
    if (conn.fd < 0) throw std::runtime_error("accept failed");
    return recv_all(conn.fd);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decoykit: decoy-tolerant, pattern-devoid cipher toolkit"};
    app.require_subcommand(1);
    std::ostringstream report; // late stderr diagnostics, flushed on success

    // shared option storage; each subcommand binds the fields it uses
    std::optional<std::uint64_t> seed;
    std::string in_path = "-";
    std::string out_path = "-";
    std::string key_path;

    const auto add_io = [&](CLI::App* cmd, bool with_key = true) {
        cmd->add_option("--in", in_path, "input file, '-' for stdin")->capture_default_str();
        cmd->add_option("--out,-o", out_path, "output file, '-' for stdout")
            ->capture_default_str();
        if (with_key) cmd->add_option("--key,-k", key_path, "key file")->required();
    };
    const auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed,
                        "64-bit seed (default: DECOYKIT_SEED env, then system entropy)");
    };

    // ---- keygen ----
    auto* keygen = app.add_subcommand("keygen", "generate a key file");
    keygen->require_subcommand(1);

    int kg_n = 4, kg_l = 8;
    auto* kg_bitflip = keygen->add_subcommand("bitflip", "BitFlip alphabet key");
    kg_bitflip->add_option("--n", kg_n, "number of letters")->capture_default_str();
    kg_bitflip->add_option("--l", kg_l, "bits per token")->capture_default_str();
    add_seed(kg_bitflip);
    kg_bitflip->add_option("--out,-o", out_path, "output file")->capture_default_str();
    kg_bitflip->callback([&] {
        auto rng = make_rng(seed);
        const auto a = bf::random_valid_alphabet(kg_n, kg_l, rng);
        write_output(out_path, bf::key_to_string(a));
    });

    int km_symbols = 65, km_stations = 0, km_junctions = 24, km_labels = 4, km_lmax = 8;
    auto* kg_bitmap = keygen->add_subcommand("bitmap", "BitMap station/junction key");
    kg_bitmap->add_option("--symbols", km_symbols, "alphabet size incl. separator")
        ->capture_default_str();
    kg_bitmap->add_option("--stations", km_stations, "station count (default: one per symbol)");
    kg_bitmap->add_option("--junctions", km_junctions, "junction count")->capture_default_str();
    kg_bitmap->add_option("--labels", km_labels, "road labels per vertex")->capture_default_str();
    kg_bitmap->add_option("--l-max", km_lmax, "path-length bound")->capture_default_str();
    add_seed(kg_bitmap);
    kg_bitmap->add_option("--out,-o", out_path, "output file")->capture_default_str();
    kg_bitmap->callback([&] {
        auto rng = make_rng(seed);
        const int stations = km_stations > 0 ? km_stations : km_symbols;
        const auto key =
            bm::generate_map(km_symbols, stations, km_junctions, km_labels, rng, km_lmax);
        write_output(out_path, bm::key_to_string(key));
    });

    int kw_tau = 64;
    auto* kg_winnow = keygen->add_subcommand("winnow", "chaffing/winnowing MAC key");
    kg_winnow->add_option("--tau", kw_tau, "tag bits: 16, 32, 64 or 160")->capture_default_str();
    add_seed(kg_winnow);
    kg_winnow->add_option("--out,-o", out_path, "output file")->capture_default_str();
    kg_winnow->callback([&] {
        auto rng = make_rng(seed);
        write_output(out_path, wn::key_to_string(wn::random_key(kw_tau, rng)));
    });

    // ---- encode/decode ----
    auto* encode = app.add_subcommand("encode", "encode a message");
    encode->require_subcommand(1);
    auto* decode = app.add_subcommand("decode", "decode a token or label stream");
    decode->require_subcommand(1);

    double enc_chaff_rate = 0.0;
    std::string enc_mode = "randomized";
    auto* enc_bitflip = encode->add_subcommand("bitflip", "message -> hex token stream");
    add_io(enc_bitflip);
    enc_bitflip->add_option("--chaff-rate", enc_chaff_rate, "chaff probability per position, < 1")
        ->capture_default_str();
    enc_bitflip->add_option("--mode", enc_mode, "randomized | degenerate")->capture_default_str();
    add_seed(enc_bitflip);
    enc_bitflip->callback([&] {
        const auto key = load_bitflip_key(key_path);
        auto rng = make_rng(seed);
        const auto tokens = bf::encode_message(key, read_text_message(in_path), enc_chaff_rate,
                                               parse_mode(enc_mode), rng);
        std::ostringstream os;
        bf::write_tokens(os, tokens);
        write_output(out_path, os.str());
    });

    auto* dec_bitflip = decode->add_subcommand("bitflip", "hex token stream -> message");
    add_io(dec_bitflip);
    dec_bitflip->callback([&] {
        const auto key = load_bitflip_key(key_path);
        std::istringstream is(read_input(in_path));
        const auto tokens = bf::read_tokens(is, key.token_length());
        const auto res = bf::decode_stream(key, tokens);
        report << "kept=" << res.kept << " discarded=" << res.discarded << "\n";
        write_output(out_path, res.text + "\n");
    });

    int bm_lmax = 8;
    auto* enc_bitmap = encode->add_subcommand("bitmap", "message -> road label stream");
    add_io(enc_bitmap);
    enc_bitmap->add_option("--l-max", bm_lmax, "path-length bound")->capture_default_str();
    add_seed(enc_bitmap);
    enc_bitmap->callback([&] {
        const auto key = load_bitmap_key(key_path);
        auto rng = make_rng(seed);
        const auto norm = bm::normalize_plaintext(read_text_message(in_path), key.separator());
        const auto labels = bm::encode(key, norm, rng, bm_lmax);
        std::ostringstream os;
        bm::write_labels(os, labels);
        write_output(out_path, os.str());
    });

    auto* dec_bitmap = decode->add_subcommand("bitmap", "road label stream -> message");
    add_io(dec_bitmap);
    dec_bitmap->callback([&] {
        const auto key = load_bitmap_key(key_path);
        std::istringstream is(read_input(in_path));
        const auto labels = bm::read_labels(is);
        const auto norm = bm::decode(key, labels);
        write_output(out_path, bm::denormalize(norm, key.separator()) + "\n");
    });

    // ---- chaff / winnow ----
    std::string ch_granularity = "byte", ch_strategy = "random", ch_decoys, ch_connect;
    std::size_t ch_per_wheat = 1;
    bool ch_distinct = false;
    auto* chaff = app.add_subcommand("chaff", "message -> MAC-tagged wire stream with chaff");
    add_io(chaff);
    chaff->add_option("--granularity", ch_granularity, "bit | nibble | byte | block:<k>")
        ->capture_default_str();
    chaff->add_option("--strategy", ch_strategy, "complement | random | decoy")
        ->capture_default_str();
    chaff->add_option("--decoys", ch_decoys, "decoy candidate file (one per line)");
    chaff->add_option("--chaff-per-wheat", ch_per_wheat, "chaff packets per wheat packet")
        ->capture_default_str();
    chaff->add_flag("--distinct-serials", ch_distinct,
                    "renumber the stream serially (decoy strategy)");
    chaff->add_option("--connect", ch_connect, "send the wire bytes to host:port instead of --out");
    add_seed(chaff);
    chaff->callback([&] {
        const auto key = load_winnow_key(key_path);
        auto rng = make_rng(seed);
        const auto g = wn::Granularity::parse(ch_granularity);
        wn::ChaffStrategy strategy = wn::ChaffStrategy::random_payload(ch_per_wheat, g);
        if (ch_strategy == "complement") {
            strategy = wn::ChaffStrategy::bit_complement(ch_per_wheat, g);
        } else if (ch_strategy == "decoy") {
            if (ch_decoys.empty()) {
                throw std::runtime_error("--strategy decoy requires --decoys");
            }
            std::vector<std::vector<std::uint8_t>> candidates;
            for (const auto& line : read_lines(ch_decoys)) candidates.push_back(to_bytes(line));
            strategy = wn::ChaffStrategy::decoy_text(candidates, ch_per_wheat, ch_distinct);
        } else if (ch_strategy != "random") {
            throw std::runtime_error("strategy must be complement, random or decoy");
        }
        const auto wheat = wn::split_message(to_bytes(read_input(in_path)), g);
        const auto stream = wn::chaff_stream(key, wheat, strategy, rng);
        std::ostringstream os;
        wn::write_stream(os, stream);
        if (!ch_connect.empty()) {
            send_to(ch_connect, os.str());
        } else {
            write_output(out_path, os.str());
        }
        report << "packets=" << stream.size() << " wheat=" << wheat.size() << "\n";
    });

    std::string wi_granularity = "byte";
    int wi_listen = 0;
    auto* winnow_cmd = app.add_subcommand("winnow", "wire stream -> authenticated message");
    add_io(winnow_cmd);
    winnow_cmd->add_option("--granularity", wi_granularity, "bit | nibble | byte | block:<k>")
        ->capture_default_str();
    winnow_cmd->add_option("--listen", wi_listen,
                           "accept one loopback connection on this port instead of --in");
    winnow_cmd->callback([&] {
        const auto key = load_winnow_key(key_path);
        const auto g = wn::Granularity::parse(wi_granularity);
        std::string wire;
        if (wi_listen > 0) {
            wire = receive_on(wi_listen);
        } else {
            wire = read_input(in_path);
        }
        std::istringstream is(wire);
        const auto stream = wn::read_stream(is);
        const auto res = wn::winnow(key, stream, g);
        report << "kept=" << res.report.kept << " discarded=" << res.report.discarded
               << " gaps=" << res.report.gaps << " conflicts=" << res.report.conflicts << "\n";
        write_output(out_path, std::string(res.message.begin(), res.message.end()));
    });

    // ---- equivocation tools ----
    std::string fk_cipher, fk_decoy;
    auto* forge = app.add_subcommand("forge-key", "pad that decrypts a ciphertext to a decoy");
    forge->add_option("--cipher", fk_cipher, "ciphertext file")->required();
    forge->add_option("--decoy", fk_decoy, "decoy plaintext file (same byte length)")->required();
    forge->add_option("--out,-o", out_path, "output file")->capture_default_str();
    forge->callback([&] {
        const auto pad =
            eq::forge_key(to_bytes(read_input(fk_cipher)), to_bytes(read_input(fk_decoy)));
        write_output(out_path, decoykit::to_hex(pad.bits) + "\n");
    });

    std::string tl_cipher, tl_candidates, tl_weights;
    double tl_threshold = 0.0;
    auto* terminal = app.add_subcommand("terminal-list",
                                        "forged key per candidate, with verification");
    terminal->add_option("--cipher", tl_cipher, "ciphertext file")->required();
    terminal->add_option("--candidates", tl_candidates, "candidate file (one per line)")
        ->required();
    terminal->add_option("--weights", tl_weights, "weight file (one decimal per line)");
    terminal->add_option("--threshold", tl_threshold, "drop entries below this weight")
        ->capture_default_str();
    terminal->add_option("--out,-o", out_path, "output file")->capture_default_str();
    terminal->callback([&] {
        const auto cipher = to_bytes(read_input(tl_cipher));
        std::vector<std::vector<std::uint8_t>> candidates;
        for (const auto& line : read_lines(tl_candidates)) candidates.push_back(to_bytes(line));
        std::vector<double> weights;
        if (!tl_weights.empty()) {
            for (const auto& line : read_lines(tl_weights)) weights.push_back(std::stod(line));
        }
        auto list = eq::build_terminal_list(cipher, candidates, weights);
        for (const auto& e : list.entries) {
            if (!e.verified) {
                throw VerificationFailure("terminal-list entry failed its decryption re-check");
            }
        }
        if (tl_threshold > 0.0) list = eq::prune_terminal_list(list, tl_threshold);
        std::ostringstream os;
        eq::write_terminal_list(os, list);
        write_output(out_path, os.str());
    });

    std::string mi_apriori;
    std::size_t mi_count = 1;
    int mi_max_edits = 1;
    auto* mimic = app.add_subcommand("mimic", "near-miss texts for an a-priori list");
    mimic->add_option("--apriori", mi_apriori, "a-priori list file (one per line)")->required();
    mimic->add_option("--count", mi_count, "number of mimics")->capture_default_str();
    mimic->add_option("--max-edits", mi_max_edits, "substitution budget per mimic")
        ->capture_default_str();
    add_seed(mimic);
    mimic->add_option("--out,-o", out_path, "output file")->capture_default_str();
    mimic->callback([&] {
        auto rng = make_rng(seed);
        const auto mimics =
            eq::mimic_candidates(read_lines(mi_apriori), mi_count, mi_max_edits, rng);
        std::string text;
        for (const auto& m : mimics) text += m + "\n";
        write_output(out_path, text);
    });

    double un_key_bits = 0.0, un_redundancy = 0.0;
    auto* unicity = app.add_subcommand("unicity", "Shannon unicity distance in symbols");
    unicity->add_option("--key-bits", un_key_bits, "key entropy in bits")->required();
    unicity->add_option("--redundancy", un_redundancy, "redundancy bits per symbol")->required();
    unicity->add_option("--out,-o", out_path, "output file")->capture_default_str();
    unicity->callback([&] {
        std::ostringstream os;
        os << eq::unicity_distance(un_key_bits, un_redundancy) << "\n";
        write_output(out_path, os.str());
    });

    // ---- evolve ----
    int ev_n = 4, ev_l = 8;
    std::size_t ev_pop = 50, ev_gens = 100;
    double ev_wcap = 1.0, ev_wchaff = 1.0, ev_wbal = 0.25, ev_target = 0.5;
    std::string ev_csv;
    auto* evolve_cmd = app.add_subcommand("evolve", "evolve a BitFlip alphabet");
    evolve_cmd->add_option("--n", ev_n, "letters")->capture_default_str();
    evolve_cmd->add_option("--l", ev_l, "bits per token")->capture_default_str();
    evolve_cmd->add_option("--population", ev_pop, "population size")->capture_default_str();
    evolve_cmd->add_option("--generations", ev_gens, "generations")->capture_default_str();
    evolve_cmd->add_option("--w-capacity", ev_wcap, "weight: min transmitter count")
        ->capture_default_str();
    evolve_cmd->add_option("--w-chaff", ev_wchaff, "weight: chaff-fraction target")
        ->capture_default_str();
    evolve_cmd->add_option("--w-balance", ev_wbal, "weight: transmitter balance")
        ->capture_default_str();
    evolve_cmd->add_option("--target-chaff", ev_target, "target chaff fraction in (0,1)")
        ->capture_default_str();
    evolve_cmd->add_option("--csv", ev_csv, "write best-per-generation CSV here");
    add_seed(evolve_cmd);
    evolve_cmd->add_option("--out,-o", out_path, "key file output")->capture_default_str();
    evolve_cmd->callback([&] {
        auto rng = make_rng(seed);
        const ev::FitnessConfig cfg(ev_wcap, ev_wchaff, ev_wbal, ev_target);
        const auto rep = ev::evolve_alphabet(ev_n, ev_l, ev_pop, ev_gens, cfg, rng);
        if (!ev_csv.empty()) {
            std::ostringstream os;
            os << "generation,best_fitness\n";
            for (std::size_t g = 0; g < rep.best_per_generation.size(); ++g) {
                os << g << "," << rep.best_per_generation[g] << "\n";
            }
            write_output(ev_csv, os.str());
        }
        report << "evaluations=" << rep.evaluations
               << " best_fitness=" << rep.best_per_generation.back() << "\n";
        write_output(out_path, bf::key_to_string(rep.final_alphabet));
    });

    // ---- analysis ----
    std::uint64_t an_generate = 0;
    double an_alpha = 0.001;
    auto* analyze = app.add_subcommand("analyze", "randomness battery over a bit sample");
    analyze->add_option("--in", in_path, "file of '0'/'1' characters (whitespace ignored)")
        ->capture_default_str();
    analyze->add_option("--generate", an_generate,
                        "test this many bits from the seeded generator instead of --in");
    analyze->add_option("--alpha", an_alpha, "significance level")->capture_default_str();
    add_seed(analyze);
    analyze->add_option("--out,-o", out_path, "output file")->capture_default_str();
    analyze->callback([&] {
        BitString bits;
        if (an_generate > 0) {
            auto rng = make_rng(seed);
            bits = decoykit::random_bits(an_generate, rng);
        } else {
            std::string txt = read_input(in_path);
            std::string clean;
            for (char c : txt) {
                if (c == '0' || c == '1') clean.push_back(c);
            }
            bits = BitString::from_string(clean);
        }
        std::ostringstream os;
        const auto emit = [&os](const an::TestResult& r) {
            os << r.name << " " << r.statistic << " " << r.p_value << " "
               << (!r.applicable ? "n/a" : (r.pass ? "pass" : "fail")) << "\n";
        };
        emit(an::monobit_test(bits, an_alpha));
        emit(an::runs_test(bits, an_alpha));
        if (bits.size() >= 320) { // 16 nibble buckets need 5 counts each
            std::vector<std::uint64_t> nibbles(16, 0);
            for (std::size_t i = 0; i + 4 <= bits.size(); i += 4) {
                std::size_t v = 0;
                for (std::size_t k = 0; k < 4; ++k) v = (v << 1) | bits.get(i + k);
                ++nibbles[v];
            }
            emit(an::chi_square_uniformity(nibbles, an_alpha));
        } else {
            os << "chi_square 0 0 n/a\n";
        }
        write_output(out_path, os.str());
    });

    std::string di_msg_a, di_msg_b, di_mode = "randomized";
    std::size_t di_samples = 4, di_trials = 2000;
    auto* distinguish = app.add_subcommand("distinguish",
                                           "advantage of a key-knowing pattern attacker");
    distinguish->add_option("--key,-k", key_path, "BitFlip key file")->required();
    distinguish->add_option("--msg-a", di_msg_a, "first message")->required();
    distinguish->add_option("--msg-b", di_msg_b, "second message (same length)")->required();
    distinguish->add_option("--samples", di_samples, "encodings per trial")->capture_default_str();
    distinguish->add_option("--trials", di_trials, "number of trials")->capture_default_str();
    distinguish->add_option("--mode", di_mode, "randomized | degenerate")->capture_default_str();
    add_seed(distinguish);
    distinguish->add_option("--out,-o", out_path, "output file")->capture_default_str();
    distinguish->callback([&] {
        const auto key = load_bitflip_key(key_path);
        auto rng = make_rng(seed);
        const auto rep = an::distinguisher_experiment(key, di_msg_a, di_msg_b, di_samples,
                                                      di_trials, parse_mode(di_mode), rng);
        std::ostringstream os;
        os << rep.trials << " " << rep.correct << " " << rep.advantage << "\n";
        write_output(out_path, os.str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const VerificationFailure& e) {
        std::cerr << "decoykit: verification failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "decoykit: " << e.what() << "\n";
        return 2;
    }
    std::cerr << report.str();
    return 0;
}
