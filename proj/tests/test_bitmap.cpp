#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "decoykit/bitmap.hpp"

using decoykit::RandomSource;
namespace bm = decoykit::bitmap;

namespace {

// Two stations, no junctions, fully wired; the smallest interesting key.
bm::MapKey tiny_key() {
    return bm::MapKey({{"A", true, 'a'}, {"B", true, '.'}},
                      {{"A", "r0", "A"},
                       {"A", "r1", "B"},
                       {"B", "r0", "A"},
                       {"B", "r1", "B"}},
                      "A", '.');
}

std::string random_payload(const bm::MapKey& key, std::size_t len, RandomSource& rng) {
    std::vector<char> payload;
    for (char c : key.alphabet()) {
        if (c != key.separator()) payload.push_back(c);
    }
    std::string msg;
    for (std::size_t i = 0; i < len; ++i) msg.push_back(payload[rng.below(payload.size())]);
    return msg;
}

} // namespace

TEST_CASE("normalize_plaintext inserts the separator between repeats only") {
    CHECK(bm::normalize_plaintext("ab", '.') == "ab");
    CHECK(bm::normalize_plaintext("aab", '.') == "a.ab");
    CHECK(bm::normalize_plaintext("", '.') == "");
    CHECK(bm::normalize_plaintext("aaa", '.') == "a.a.a");
    CHECK_THROWS_AS(bm::normalize_plaintext("a.b", '.'), std::invalid_argument);

    // output never has two equal adjacent symbols
    RandomSource rng(31);
    for (int t = 0; t < 200; ++t) {
        std::string msg;
        for (std::size_t i = 0; i < rng.below(30); ++i) {
            msg.push_back(static_cast<char>('a' + rng.below(3)));
        }
        const std::string norm = bm::normalize_plaintext(msg, '.');
        for (std::size_t i = 1; i < norm.size(); ++i) {
            CHECK(norm[i] != norm[i - 1]);
        }
    }
}

TEST_CASE("denormalize inverts normalize_plaintext") {
    CHECK(bm::denormalize("a.ab", '.') == "aab");
    CHECK(bm::denormalize("..", '.') == "");
    CHECK(bm::denormalize("", '.') == "");

    RandomSource rng(32);
    for (int t = 0; t < 1000; ++t) {
        std::string msg;
        for (std::size_t i = 0; i < rng.below(50); ++i) {
            msg.push_back(static_cast<char>('a' + rng.below(4)));
        }
        CHECK(bm::denormalize(bm::normalize_plaintext(msg, '.'), '.') == msg);
    }
}

TEST_CASE("map key construction enforces determinism and structure") {
    CHECK_THROWS_AS(bm::MapKey({}, {}, "A", '.'), std::invalid_argument);
    // duplicate (vertex, label)
    CHECK_THROWS_AS(bm::MapKey({{"A", true, '.'}},
                               {{"A", "r0", "A"}, {"A", "r0", "A"}}, "A", '.'),
                    std::invalid_argument);
    // unknown start
    CHECK_THROWS_AS(bm::MapKey({{"A", true, '.'}}, {}, "Z", '.'), std::invalid_argument);
    // separator not carried by any station
    CHECK_THROWS_AS(bm::MapKey({{"A", true, 'a'}}, {}, "A", '.'), std::invalid_argument);
    // duplicate vertex id
    CHECK_THROWS_AS(bm::MapKey({{"A", true, '.'}, {"A", false, 0}}, {}, "A", '.'),
                    std::invalid_argument);
}

TEST_CASE("encode takes the only road when the map forces it") {
    // start junction O, one road r1 to station 'k' (also the separator station)
    const bm::MapKey key({{"O", false, 0}, {"K", true, 'k'}}, {{"O", "r1", "K"}}, "O", 'k');
    RandomSource rng(1);
    const auto labels = bm::encode(key, "k", rng);
    CHECK(labels == std::vector<std::string>{"r1"});
    CHECK(bm::decode(key, labels) == "k");
}

TEST_CASE("encode rejects unnormalized or unknown input") {
    const auto key = tiny_key();
    RandomSource rng(2);
    CHECK_THROWS_WITH(bm::encode(key, "aab", rng, 8),
                      Catch::Matchers::ContainsSubstring("position 1"));
    CHECK_THROWS_AS(bm::encode(key, "ax", rng, 8), std::invalid_argument);
    // ".." is a repeat too
    CHECK_THROWS_AS(bm::encode(key, "..", rng, 8), std::invalid_argument);
}

TEST_CASE("decode reports undefined transitions with their position") {
    const auto key = tiny_key();
    CHECK(bm::decode(key, {}) == "");
    CHECK_THROWS_WITH(bm::decode(key, {"r0", "r1", "r0", "zz"}),
                      Catch::Matchers::ContainsSubstring("position 3"));
}

TEST_CASE("roundtrip over generated maps") {
    RandomSource rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_junctions = 2 + static_cast<int>(rng.below(8));
        const int n_labels = 2 + static_cast<int>(rng.below(3));
        // keep within the junction tree's guaranteed symbol capacity
        const int capacity = n_junctions * (n_labels - 1) + 1;
        const int n_symbols = 2 + static_cast<int>(rng.below(
                                      static_cast<std::uint64_t>(std::min(8, capacity - 1))));
        const int n_stations = n_symbols + static_cast<int>(rng.below(4));
        const auto key =
            bm::generate_map(n_symbols, n_stations, n_junctions, n_labels, rng);

        const std::string msg = random_payload(key, rng.below(25), rng);
        const std::string norm = bm::normalize_plaintext(msg, key.separator());
        const auto labels = bm::encode(key, norm, rng);
        const std::string decoded = bm::decode(key, labels);
        CHECK(decoded == norm); // stations emit exactly the normalized text
        CHECK(bm::denormalize(decoded, key.separator()) == msg);
    }
}

TEST_CASE("parallel roads give different label sequences under different seeds") {
    RandomSource gen(5);
    const auto key = bm::generate_map(4, 6, 6, 3, gen);
    const std::string norm = bm::normalize_plaintext(random_payload(key, 20, gen), key.separator());

    RandomSource r1(100), r2(200);
    const auto l1 = bm::encode(key, norm, r1);
    const auto l2 = bm::encode(key, norm, r2);
    CHECK(bm::decode(key, l1) == norm);
    CHECK(bm::decode(key, l2) == norm);
    CHECK(l1 != l2); // many candidate paths per symbol; collision odds are negligible
}

TEST_CASE("generate_map produces valid keys across seeds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RandomSource rng(seed);
        const auto key = bm::generate_map(3, 4, 3, 2, rng);
        CHECK(bm::check_key(key).empty());
        CHECK(key.alphabet().size() == 3);
        CHECK(key.alphabet().count(key.separator()) == 1);
    }
}

TEST_CASE("generate_map is deterministic per seed") {
    RandomSource r1(9), r2(9);
    CHECK(bm::key_to_string(bm::generate_map(4, 5, 4, 3, r1)) ==
          bm::key_to_string(bm::generate_map(4, 5, 4, 3, r2)));
}

TEST_CASE("generate_map handles the smallest feasible configuration") {
    RandomSource rng(12);
    const auto key = bm::generate_map(2, 2, 0, 2, rng);
    CHECK(key.vertex_count() == 2);
    CHECK(bm::check_key(key).empty());

    // and rejects impossible parameter mixes
    CHECK_THROWS_AS(bm::generate_map(5, 3, 2, 2, rng), std::invalid_argument);
    CHECK_THROWS_AS(bm::generate_map(1, 2, 0, 2, rng), std::invalid_argument);
    CHECK_THROWS_AS(bm::generate_map(3, 3, 1, 1, rng), std::invalid_argument);
}

TEST_CASE("generate_map fails honestly when junction capacity cannot reach the stations") {
    RandomSource rng(4);
    // 40 symbols across 40 stations but a single 2-label junction: the tree
    // has too few leaf slots and random extras cannot cover every source
    CHECK_THROWS_AS(bm::generate_map(40, 40, 1, 2, rng), std::runtime_error);
}

TEST_CASE("forge_decoy_map rewrites station symbols only") {
    RandomSource rng(21);
    const auto key = bm::generate_map(5, 7, 5, 3, rng);
    const std::string msg = random_payload(key, 12, rng);
    const std::string norm = bm::normalize_plaintext(msg, key.separator());
    const auto labels = bm::encode(key, norm, rng);

    SECTION("identity forgery returns the key unchanged") {
        const auto forged = bm::forge_decoy_map(key, labels, msg);
        CHECK(bm::key_to_string(forged) == bm::key_to_string(key));
    }
    SECTION("forged map decodes the same labels to the decoy") {
        // build a decoy consistent with the visit pattern: one fresh symbol
        // per distinct visited station
        const auto visits = bm::decode_visits(key, labels);
        std::map<std::size_t, char> station_to_symbol;
        std::string decoy_norm;
        char next = 'A';
        for (std::size_t v : visits) {
            if (!station_to_symbol.count(v)) station_to_symbol[v] = next++;
            decoy_norm.push_back(station_to_symbol[v]);
        }
        const std::string decoy = bm::denormalize(decoy_norm, key.separator());
        // usable only when normalization reproduces the same layout
        if (bm::normalize_plaintext(decoy, key.separator()) == decoy_norm) {
            const auto forged = bm::forge_decoy_map(key, labels, decoy);
            CHECK(bm::decode(forged, labels) == decoy_norm);
            // graph untouched: same ids, same edges
            REQUIRE(forged.vertex_count() == key.vertex_count());
            for (std::size_t i = 0; i < key.vertex_count(); ++i) {
                CHECK(forged.vertex(i).id == key.vertex(i).id);
                CHECK(forged.vertex(i).is_station == key.vertex(i).is_station);
                CHECK(forged.out_edges(i) == key.out_edges(i));
            }
        }
    }
}

TEST_CASE("forge_decoy_map single-visit walk accepts any single-symbol decoy") {
    const bm::MapKey key({{"O", false, 0}, {"K", true, 'k'}}, {{"O", "r1", "K"}}, "O", 'k');
    const std::vector<std::string> labels{"r1"};
    const auto forged = bm::forge_decoy_map(key, labels, "z");
    CHECK(bm::decode(forged, labels) == "z");
}

TEST_CASE("forge_decoy_map rejects visit-pattern conflicts with the position pair") {
    // walk visits station A twice: decoy must place equal symbols there
    const bm::MapKey key({{"A", true, 'a'}, {"B", true, 'b'}, {"S", true, '.'}},
                         {{"A", "r0", "B"}, {"B", "r0", "A"}, {"A", "r1", "S"}, {"S", "r0", "A"}},
                         "B", '.');
    const std::vector<std::string> labels{"r0", "r0", "r0"}; // B->A->B->A: visits A,B,A
    CHECK(bm::decode(key, labels) == "aba");

    CHECK(bm::decode(bm::forge_decoy_map(key, labels, "xyx"), labels) == "xyx");
    try {
        bm::forge_decoy_map(key, labels, "xyz");
        FAIL("expected InconsistentDecoyError");
    } catch (const bm::InconsistentDecoyError& e) {
        CHECK(e.first_position == 0);
        CHECK(e.second_position == 2);
    }
    // wrong length decoy
    CHECK_THROWS_AS(bm::forge_decoy_map(key, labels, "xy"), std::invalid_argument);
}

TEST_CASE("key file roundtrip and golden rendering") {
    const auto key = tiny_key();
    const std::string text = bm::key_to_string(key);
    CHECK(text ==
          "bitmap v1\n"
          "start=A\n"
          "sep=.\n"
          "vertex A station a\n"
          "vertex B station .\n"
          "edge A r0 A\n"
          "edge A r1 B\n"
          "edge B r0 A\n"
          "edge B r1 B\n");
    CHECK(bm::key_to_string(bm::key_from_string(text)) == text);

    RandomSource rng(66);
    for (int i = 0; i < 10; ++i) {
        const auto k = bm::generate_map(3 + static_cast<int>(rng.below(5)), 8, 5, 3, rng);
        const std::string t = bm::key_to_string(k);
        CHECK(bm::key_to_string(bm::key_from_string(t)) == t);
    }

    CHECK_THROWS_AS(bm::key_from_string("bitmap v2\n"), std::runtime_error);
    CHECK_THROWS_AS(bm::key_from_string("bitmap v1\nstart=A\nsep=.\nvertex A station a\n"
                                        "edge A r0 Z\n"),
                    std::runtime_error);
}
