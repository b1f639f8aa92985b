#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "fsfbmc/channel_model.hpp"
#include "fsfbmc/rng.hpp"

using namespace fsfbmc;

TEST_CASE("preset profiles quantize the delay spread onto the tap grid") {
    const DelayProfile d = preset_profile("D");
    const DelayProfile e = preset_profile("E");
    const DelayProfile f = preset_profile("F");
    CHECK(d.tapDelays.size() == 8);
    CHECK(e.tapDelays.size() == 15);
    CHECK(f.tapDelays.size() == 22);
    for (std::size_t i = 0; i < d.tapDelays.size(); ++i)
        CHECK(d.tapDelays[i] == static_cast<int>(i));

    for (const DelayProfile* p : {&d, &e, &f}) {
        double total = 0.0;
        for (double v : p->tapPowers) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 1; i < p->tapPowers.size(); ++i)
            CHECK(p->tapPowers[i] < p->tapPowers[i - 1]);
    }

    // exponential decay constant is a quarter of the delay spread
    CHECK(d.tapPowers[1] / d.tapPowers[0] ==
          doctest::Approx(std::exp(-50.0 / (390.0 / 4.0))).epsilon(1e-12));

    const DelayProfile flat = preset_profile("flat");
    CHECK(flat.tapDelays == std::vector<int>{0});
    CHECK(flat.tapPowers == std::vector<double>{1.0});

    CHECK_THROWS_AS(preset_profile("G"), std::invalid_argument);
}

TEST_CASE("channel draws are reproducible and unit power on average") {
    const DelayProfile profile = preset_profile("E");
    const ChannelFrequencyResponse a = realize_channel(profile, 2, 2, 64, 42);
    const ChannelFrequencyResponse b = realize_channel(profile, 2, 2, 64, 42);
    const ChannelFrequencyResponse c = realize_channel(profile, 2, 2, 64, 43);
    for (std::size_t i = 0; i < a.H.size(); ++i) CHECK(a.H[i] == b.H[i]);
    double moved = 0.0;
    for (std::size_t i = 0; i < a.H.size(); ++i) moved += std::abs(a.H[i] - c.H[i]);
    CHECK(moved > 1.0);

    double meanPower = 0.0;
    const int draws = 10000;
    for (int s = 0; s < draws; ++s) {
        const ChannelFrequencyResponse ch = realize_channel(profile, 1, 1, 1, 1000 + s);
        for (std::size_t p = 0; p < ch.tapDelays.size(); ++p)
            meanPower += std::norm(ch.tap(0, 0, static_cast<int>(p)));
    }
    meanPower /= draws;
    CHECK(meanPower == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("frequency response is the tap DFT") {
    const ChannelFrequencyResponse ch = realize_channel(preset_profile("F"), 2, 2, 128, 7);
    // inverse DFT of any (r, t) row must land back on the taps
    for (int r = 0; r < 2; ++r)
        for (int t = 0; t < 2; ++t)
            for (std::size_t p = 0; p < ch.tapDelays.size(); ++p) {
                cd acc(0, 0);
                for (int k = 0; k < 128; ++k)
                    acc += ch.h(k, r, t) *
                           std::polar(1.0, 2.0 * kPi * k * ch.tapDelays[p] / 128.0);
                acc /= 128.0;
                CHECK(std::abs(acc - ch.tap(r, t, static_cast<int>(p))) < 1e-10);
            }
}

TEST_CASE("longer delay spreads decorrelate adjacent tones faster") {
    double driftD = 0.0, driftF = 0.0;
    for (int s = 0; s < 300; ++s) {
        const ChannelFrequencyResponse d = realize_channel(preset_profile("D"), 1, 1, 256, 50 + s);
        const ChannelFrequencyResponse f = realize_channel(preset_profile("F"), 1, 1, 256, 50 + s);
        for (int k = 1; k < 256; ++k) {
            driftD += std::abs(d.h(k, 0, 0) - d.h(k - 1, 0, 0));
            driftF += std::abs(f.h(k, 0, 0) - f.h(k - 1, 0, 0));
        }
    }
    CHECK(driftF > 1.5 * driftD);
}

TEST_CASE("noise variance follows the link budget") {
    CHECK(snr_to_noise_variance(10.0, 2) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(snr_to_noise_variance(0.0, 2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(snr_to_noise_variance(30.0, 2) == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(snr_to_noise_variance(20.0, 4, 0.5, 2.0) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(snr_to_noise_variance(std::numeric_limits<double>::infinity(), 2) == 0.0);
}

TEST_CASE("awgn injection hits the requested variance") {
    SampleStream y(1, 500000);
    add_awgn(y, 0.4, 0.75, 99);
    double meanPower = 0.0;
    for (const cd& v : y.x) meanPower += std::norm(v);
    meanPower /= static_cast<double>(y.samples);
    CHECK(meanPower == doctest::Approx(0.3).epsilon(0.01));

    SampleStream clean(2, 64);
    clean.at(1, 3) = cd(5, -2);
    SampleStream untouched = clean;
    add_awgn(untouched, 0.0, 1.0, 1);
    for (std::size_t i = 0; i < clean.x.size(); ++i) CHECK(clean.x[i] == untouched.x[i]);

    SampleStream a(1, 64), b(1, 64);
    add_awgn(a, 1.0, 1.0, 7);
    add_awgn(b, 1.0, 1.0, 7);
    for (std::size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
    CHECK_THROWS_AS(add_awgn(a, -1.0, 1.0, 7), std::invalid_argument);
}

TEST_CASE("profile files round-trip through the loader") {
    const std::string path = "/tmp/fsfbmc_test_profile.txt";
    {
        std::ofstream out(path);
        out << "# indoor office draw\n";
        out << "name = office\n";
        out << "taps = 0:0.5 2:0.25 5:0.25\n";
    }
    const DelayProfile p = load_profile(path);
    CHECK(p.name == "office");
    CHECK(p.tapDelays == std::vector<int>{0, 2, 5});
    CHECK(p.tapPowers[0] == doctest::Approx(0.5));
    CHECK(p.tapPowers[1] == doctest::Approx(0.25));
    CHECK(p.tapPowers[2] == doctest::Approx(0.25));

    {
        std::ofstream out(path);
        out << "name=synthF\n";
        out << "max_delay_ns=1050\n";
    }
    const DelayProfile synth = load_profile(path);
    const DelayProfile preset = preset_profile("F");
    CHECK(synth.tapDelays == preset.tapDelays);
    for (std::size_t i = 0; i < synth.tapPowers.size(); ++i)
        CHECK(synth.tapPowers[i] == doctest::Approx(preset.tapPowers[i]).epsilon(1e-12));

    {
        std::ofstream out(path);
        out << "name=broken\n";
    }
    CHECK_THROWS_AS(load_profile(path), std::runtime_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_profile(path), std::runtime_error);
}

TEST_CASE("channel application is the tap convolution") {
    const ChannelFrequencyResponse ch = realize_channel(preset_profile("D"), 2, 2, 32, 11);

    // a unit impulse on one transmit antenna reads out that antenna's taps
    for (int t = 0; t < 2; ++t) {
        SampleStream x(2, 4);
        x.at(t, 0) = cd(1, 0);
        const SampleStream y = apply_channel(x, ch);
        CHECK(y.samples == 4 + ch.max_delay());
        for (int r = 0; r < 2; ++r)
            for (std::size_t p = 0; p < ch.tapDelays.size(); ++p)
                CHECK(std::abs(y.at(r, ch.tapDelays[p]) -
                               ch.tap(r, t, static_cast<int>(p))) < 1e-14);
    }

    SampleStream bad(3, 4);
    CHECK_THROWS_AS(apply_channel(bad, ch), std::invalid_argument);
}

TEST_CASE("exported responses read back tone major") {
    const ChannelFrequencyResponse ch = realize_channel(preset_profile("D"), 2, 2, 16, 3);
    const std::string path = "/tmp/fsfbmc_test_channel.c64";
    export_channel(ch, path);
    const std::vector<cd> flat = read_complex64(path);
    std::remove(path.c_str());
    REQUIRE(flat.size() == ch.H.size());
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(std::abs(flat[i] - ch.H[i]) < 1e-6);
}
