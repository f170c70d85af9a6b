#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "decoykit/winnow.hpp"

using decoykit::RandomSource;
namespace wn = decoykit::winnow;

namespace {

std::vector<std::uint8_t> bytes(std::string_view s) {
    return {s.begin(), s.end()};
}

std::string hex(const std::vector<std::uint8_t>& v) {
    static constexpr char d[] = "0123456789abcdef";
    std::string out;
    for (std::uint8_t b : v) {
        out.push_back(d[b >> 4]);
        out.push_back(d[b & 0x0f]);
    }
    return out;
}

template <std::size_t N>
std::string hex(const std::array<std::uint8_t, N>& v) {
    return hex(std::vector<std::uint8_t>(v.begin(), v.end()));
}

wn::WinnowKey test_key(int tau) {
    std::array<std::uint8_t, 32> secret{};
    for (std::size_t i = 0; i < secret.size(); ++i) secret[i] = static_cast<std::uint8_t>(i);
    return wn::WinnowKey(secret, tau);
}

std::vector<std::uint8_t> random_message(std::size_t len, RandomSource& rng) {
    std::vector<std::uint8_t> msg(len);
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng.below(256));
    return msg;
}

} // namespace

TEST_CASE("HMAC-SHA1 matches the RFC 2202 vectors") {
    const std::vector<std::uint8_t> k1(20, 0x0b);
    const auto d1 = bytes("Hi There");
    CHECK(hex(wn::hmac_sha1(k1.data(), k1.size(), d1.data(), d1.size())) ==
          "b617318655057264e28bc0b6fb378c8ef146be00");

    const auto k2 = bytes("Jefe");
    const auto d2 = bytes("what do ya want for nothing?");
    CHECK(hex(wn::hmac_sha1(k2.data(), k2.size(), d2.data(), d2.size())) ==
          "effcdf6ae5eb2fa2d27416d5f184df9c259a7c79");
}

TEST_CASE("mac_tag is deterministic and truncates to tau bits") {
    for (int tau : {16, 32, 64, 160}) {
        const auto key = test_key(tau);
        const auto t1 = wn::mac_tag(key, 7, bytes("hello"));
        const auto t2 = wn::mac_tag(key, 7, bytes("hello"));
        CHECK(t1 == t2);
        CHECK(t1.size() == static_cast<std::size_t>(tau) / 8);
    }
    // truncation takes the leftmost bytes of the full digest
    const auto key16 = test_key(16);
    const auto key160 = test_key(160);
    const auto short_tag = wn::mac_tag(key16, 3, bytes("x"));
    const auto long_tag = wn::mac_tag(key160, 3, bytes("x"));
    CHECK(std::equal(short_tag.begin(), short_tag.end(), long_tag.begin()));

    CHECK_THROWS_AS(test_key(24), std::invalid_argument);
}

TEST_CASE("flipping a payload bit moves about half the tag bits") {
    const auto key = test_key(64);
    RandomSource rng(8);
    double total = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        auto payload = random_message(16, rng);
        const auto tag_a = wn::mac_tag(key, 1, payload);
        payload[rng.below(payload.size())] ^=
            static_cast<std::uint8_t>(1u << rng.below(8));
        const auto tag_b = wn::mac_tag(key, 1, payload);
        int diff = 0;
        for (std::size_t i = 0; i < tag_a.size(); ++i) {
            diff += std::popcount(static_cast<unsigned>(tag_a[i] ^ tag_b[i]));
        }
        total += diff;
    }
    const double mean = total / trials; // expect tau/2 = 32
    CHECK(mean > 30.0);
    CHECK(mean < 34.0);
}

TEST_CASE("forgery probability is 2^-tau") {
    CHECK(wn::forgery_probability(1) == 0.5);
    CHECK(wn::forgery_probability(16) == Catch::Approx(1.0 / 65536.0));
    // tau=64: "one in 2^64, approximately one in 10^19"
    CHECK(wn::forgery_probability(64) == Catch::Approx(5.421e-20).epsilon(1e-3));
    CHECK(wn::forgery_probability(64) < 1e-19);
    CHECK(wn::forgery_probability(64) > 1e-20);
    CHECK_THROWS_AS(wn::forgery_probability(0), std::invalid_argument);
}

TEST_CASE("split_message worked examples") {
    SECTION("byte granularity") {
        const auto pieces = wn::split_message(bytes("Hi"), wn::Granularity::byte());
        REQUIRE(pieces.size() == 2);
        CHECK(pieces[0].first == 1);
        CHECK(pieces[0].second == bytes("H"));
        CHECK(pieces[1].first == 2);
        CHECK(pieces[1].second == bytes("i"));
    }
    SECTION("nibble granularity, high nibble first") {
        const auto pieces = wn::split_message({0x46}, wn::Granularity::nibble()); // 0100 0110
        REQUIRE(pieces.size() == 2);
        CHECK(pieces[0].second == std::vector<std::uint8_t>{0x4}); // 0100
        CHECK(pieces[1].second == std::vector<std::uint8_t>{0x6}); // 0110
    }
    SECTION("bit granularity, most significant first") {
        const auto pieces = wn::split_message({0x80}, wn::Granularity::bit());
        REQUIRE(pieces.size() == 8);
        CHECK(pieces[0].second == std::vector<std::uint8_t>{1});
        for (std::size_t i = 1; i < 8; ++i) {
            CHECK(pieces[i].second == std::vector<std::uint8_t>{0});
        }
    }
    SECTION("block granularity with a short tail") {
        const auto pieces = wn::split_message(bytes("abcde"), wn::Granularity::block(2));
        REQUIRE(pieces.size() == 3);
        CHECK(pieces[2].second == bytes("e"));
    }
}

TEST_CASE("split and join are inverse at every granularity") {
    RandomSource rng(15);
    const std::vector<wn::Granularity> gs = {
        wn::Granularity::bit(), wn::Granularity::nibble(), wn::Granularity::byte(),
        wn::Granularity::block(1), wn::Granularity::block(3), wn::Granularity::block(16)};
    for (int trial = 0; trial < 50; ++trial) {
        const auto msg = random_message(rng.below(100), rng);
        for (const auto& g : gs) {
            const auto pieces = wn::split_message(msg, g);
            std::vector<std::vector<std::uint8_t>> payloads;
            for (std::uint32_t i = 0; i < pieces.size(); ++i) {
                CHECK(pieces[i].first == i + 1); // serials start at 1 and increment
                payloads.push_back(pieces[i].second);
            }
            CHECK(wn::join_payloads(payloads, g) == msg);
        }
    }
}

TEST_CASE("granularity parsing") {
    CHECK(wn::Granularity::parse("bit").kind == wn::Granularity::Kind::bit);
    CHECK(wn::Granularity::parse("block:7").block_size == 7);
    CHECK(wn::Granularity::parse("byte").to_string() == "byte");
    CHECK_THROWS_AS(wn::Granularity::parse("word"), std::invalid_argument);
    CHECK_THROWS_AS(wn::Granularity::parse("block:0"), std::invalid_argument);
}

TEST_CASE("chaff_stream pairs each wheat bit with its complement") {
    const auto key = test_key(16);
    RandomSource rng(4);
    const auto wheat = wn::split_message({0x00}, wn::Granularity::bit());
    const auto strategy = wn::ChaffStrategy::bit_complement(1, wn::Granularity::bit());
    const auto stream = wn::chaff_stream(key, {wheat[0]}, strategy, rng);

    REQUIRE(stream.size() == 2);
    CHECK(stream[0].serial == 1);
    CHECK(stream[1].serial == 1);
    std::set<std::uint8_t> values{stream[0].payload.at(0), stream[1].payload.at(0)};
    CHECK(values == std::set<std::uint8_t>{0, 1}); // the bit and its complement
    // exactly one of the two carries a valid tag
    int valid = 0;
    for (const auto& p : stream) {
        if (p.tag == wn::mac_tag(key, p.serial, p.payload)) ++valid;
    }
    CHECK(valid == 1);
}

TEST_CASE("chaff_stream interleaves the decoy-text candidates") {
    const auto key = test_key(16);
    RandomSource rng(6);
    const std::vector<std::vector<std::uint8_t>> decoys = {
        bytes("Hi John"), bytes("Are you coming"), bytes("Are you going"),
        bytes("to restaurant"), bytes("to the movie")};
    const auto strategy = wn::ChaffStrategy::decoy_text(decoys, 5);
    const std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> wheat = {
        {1, bytes("Hi Stella")}};
    const auto stream = wn::chaff_stream(key, wheat, strategy, rng);

    REQUIRE(stream.size() == 6);
    int valid = 0;
    std::set<std::string> payloads;
    for (const auto& p : stream) {
        payloads.insert(std::string(p.payload.begin(), p.payload.end()));
        if (p.tag == wn::mac_tag(key, p.serial, p.payload)) {
            ++valid;
            CHECK(p.payload == bytes("Hi Stella"));
        }
    }
    CHECK(valid == 1);
    CHECK(payloads.count("Hi Stella") == 1);

    CHECK_THROWS_AS(wn::ChaffStrategy::decoy_text({}, 1), std::invalid_argument);
}

TEST_CASE("chaff_stream distinct-serial mode renumbers the whole listing") {
    const auto key = test_key(16);
    RandomSource rng(10);
    const auto strategy =
        wn::ChaffStrategy::decoy_text({bytes("Hi John"), bytes("to the movie")}, 2, true);
    const std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> wheat = {
        {1, bytes("Hi Stella")}, {2, bytes("see you")}};
    const auto stream = wn::chaff_stream(key, wheat, strategy, rng);

    REQUIRE(stream.size() == 6);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        CHECK(stream[i].serial == i + 1); // serials follow transmission order
    }
    // winnowing still reconstructs the wheat in order
    const auto res = wn::winnow(key, stream, wn::Granularity::block(16));
    CHECK(res.message == bytes("Hi Stellasee you"));
    CHECK(res.report.kept == 2);
    // chaff serials up to the last wheat serial surface as gaps
    std::uint32_t max_wheat = 0;
    for (const auto& p : stream) {
        if (p.tag == wn::mac_tag(key, p.serial, p.payload)) max_wheat = std::max(max_wheat, p.serial);
    }
    CHECK(res.report.gaps == max_wheat - 2);
}

TEST_CASE("random_payload chaff multiplies the packet count") {
    const auto key = test_key(16);
    RandomSource rng(12);
    std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> wheat;
    for (std::uint32_t i = 1; i <= 100; ++i) wheat.push_back({i, {static_cast<std::uint8_t>(i)}});
    const auto stream =
        wn::chaff_stream(key, wheat, wn::ChaffStrategy::random_payload(3), rng);
    CHECK(stream.size() == 400);
}

TEST_CASE("winnow reconstructs the message for every strategy") {
    RandomSource rng(90);
    for (int trial = 0; trial < 100; ++trial) {
        const auto key = wn::random_key(trial % 2 == 0 ? 64 : 32, rng);
        const auto msg = random_message(1 + rng.below(60), rng);
        const wn::Granularity g = (trial % 4 == 0)   ? wn::Granularity::bit()
                                  : (trial % 4 == 1) ? wn::Granularity::nibble()
                                  : (trial % 4 == 2) ? wn::Granularity::byte()
                                                     : wn::Granularity::block(4);
        wn::ChaffStrategy strategy = (trial % 3 == 0)
                                         ? wn::ChaffStrategy::bit_complement(2, g)
                                     : (trial % 3 == 1)
                                         ? wn::ChaffStrategy::decoy_text({bytes("ruse")}, 2)
                                         : wn::ChaffStrategy::random_payload(2, g);
        const auto wheat = wn::split_message(msg, g);
        auto stream = wn::chaff_stream(key, wheat, strategy, rng);

        // order independence: shuffle the entire stream before winnowing
        for (std::size_t i = stream.size(); i > 1; --i) {
            std::swap(stream[i - 1], stream[rng.below(i)]);
        }
        const auto res = wn::winnow(key, stream, g);
        CHECK(res.message == msg);
        CHECK(res.report.kept == wheat.size());
        CHECK(res.report.discarded == stream.size() - wheat.size());
        CHECK(res.report.gaps == 0);
        CHECK(res.report.conflicts == 0);
    }
}

TEST_CASE("winnow with the wrong key keeps nothing at tau=64") {
    RandomSource rng(33);
    const auto key = wn::random_key(64, rng);
    const auto wrong = wn::random_key(64, rng);
    std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> wheat;
    for (std::uint32_t i = 1; i <= 10000; ++i) {
        wheat.push_back({i, {static_cast<std::uint8_t>(i & 0xff)}});
    }
    const auto stream = wn::chaff_stream(key, wheat, wn::ChaffStrategy::random_payload(0 + 1), rng);
    const auto res = wn::winnow(wrong, stream);
    CHECK(res.report.kept == 0);
    CHECK(res.message.empty());
}

TEST_CASE("winnow on the empty stream") {
    const auto res = wn::winnow(test_key(16), {});
    CHECK(res.message.empty());
    CHECK(res.report.kept == 0);
    CHECK(res.report.discarded == 0);
    CHECK(res.report.gaps == 0);
    CHECK(res.report.conflicts == 0);
}

TEST_CASE("winnow reports gaps and conflicts instead of failing") {
    const auto key = test_key(16);
    std::vector<wn::Packet> stream;
    // serials 1 and 3 valid; serial 2 missing; serial 1 duplicated with a
    // different valid payload (a conflict; first wins)
    stream.push_back({1, bytes("A"), wn::mac_tag(key, 1, bytes("A"))});
    stream.push_back({3, bytes("C"), wn::mac_tag(key, 3, bytes("C"))});
    stream.push_back({1, bytes("X"), wn::mac_tag(key, 1, bytes("X"))});

    const auto res = wn::winnow(key, stream);
    CHECK(res.message == bytes("AC"));
    CHECK(res.report.kept == 3);
    CHECK(res.report.gaps == 1);
    CHECK(res.report.conflicts == 1);
}

TEST_CASE("random tags are accepted at roughly the 2^-tau rate") {
    // desk-scale Monte Carlo at tau=16; the acceptance suite runs 10^6
    const auto key = test_key(16);
    RandomSource rng(321);
    const int n = 100000;
    int accepted = 0;
    const auto payload = bytes("x");
    for (int i = 0; i < n; ++i) {
        wn::Packet p{1, payload, {static_cast<std::uint8_t>(rng.below(256)),
                                  static_cast<std::uint8_t>(rng.below(256))}};
        if (p.tag == wn::mac_tag(key, p.serial, p.payload)) ++accepted;
    }
    const double p_hat = static_cast<double>(accepted) / n;
    const double p_true = 1.0 / 65536.0;
    const double sigma = std::sqrt(p_true * (1 - p_true) / n);
    CHECK(std::abs(p_hat - p_true) <= 4.0 * sigma);
}

TEST_CASE("wire format golden bytes") {
    const auto key = test_key(16);
    const wn::Packet p{1, bytes("Hi"), wn::mac_tag(key, 1, bytes("Hi"))};
    std::ostringstream os;
    wn::write_packet(os, p);
    const std::string wire = os.str();
    // independently computed: HMAC-SHA1(00..1f, 00000001 || "Hi") starts 078a
    CHECK(hex(std::vector<std::uint8_t>(wire.begin(), wire.end())) ==
          "435701000000010002486902078a");

    std::istringstream is(wire);
    const auto back = wn::read_stream(is);
    REQUIRE(back.size() == 1);
    CHECK(back[0].serial == p.serial);
    CHECK(back[0].payload == p.payload);
    CHECK(back[0].tag == p.tag);
}

TEST_CASE("wire stream roundtrip and error reporting") {
    const auto key = test_key(64);
    RandomSource rng(1);
    const auto wheat = wn::split_message(bytes("wire format"), wn::Granularity::block(4));
    const auto stream = wn::chaff_stream(key, wheat, wn::ChaffStrategy::random_payload(2), rng);

    std::ostringstream os;
    wn::write_stream(os, stream);
    std::istringstream is(os.str());
    const auto back = wn::read_stream(is);
    REQUIRE(back.size() == stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        CHECK(back[i].serial == stream[i].serial);
        CHECK(back[i].payload == stream[i].payload);
        CHECK(back[i].tag == stream[i].tag);
    }

    SECTION("bad magic") {
        std::string garbled = os.str();
        garbled[0] = 'X';
        std::istringstream bad(garbled);
        CHECK_THROWS_WITH(wn::read_stream(bad), Catch::Matchers::ContainsSubstring("magic"));
    }
    SECTION("truncation") {
        std::istringstream bad(os.str().substr(0, 5));
        CHECK_THROWS_WITH(wn::read_stream(bad), Catch::Matchers::ContainsSubstring("truncated"));
    }
}

TEST_CASE("key file roundtrip and golden rendering") {
    const auto key = test_key(16);
    const std::string text = wn::key_to_string(key);
    CHECK(text ==
          "winnow v1\n"
          "secret=000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f\n"
          "tau=16\n");
    const auto back = wn::key_from_string(text);
    CHECK(back.secret == key.secret);
    CHECK(back.tag_bits == key.tag_bits);

    CHECK_THROWS_AS(wn::key_from_string("winnow v2\n"), std::runtime_error);
    CHECK_THROWS_AS(wn::key_from_string("winnow v1\nsecret=00\ntau=16\n"), std::runtime_error);
    CHECK_THROWS_AS(
        wn::key_from_string("winnow v1\nsecret=" + std::string(64, '0') + "\ntau=15\n"),
        std::runtime_error);
}
