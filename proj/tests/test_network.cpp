#include "ipdnn/network.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>

using namespace ipdnn;
using Catch::Matchers::WithinAbs;

TEST_CASE("net_init distribution and determinism")
{
    const NetworkParams a = net_init(123, 4);
    const NetworkParams b = net_init(123, 4);
    const NetworkParams c = net_init(124, 4);
    CHECK((a.weight - b.weight).norm() == 0.0);
    CHECK((a.weight - c.weight).norm() != 0.0);

    const double bound = 1.0 / std::sqrt(32.0);
    CHECK(a.weight.cwiseAbs().maxCoeff() <= bound);
    CHECK(a.bias.norm() == 0.0);
    CHECK(a.glow.c() == 1.0);
    CHECK(a.glow.sigma() == 1.0);
    CHECK(a.dim() == 32);
}

TEST_CASE("channel coding is contrast-relative and invertible")
{
    PermittivityMap m(2);
    m.values << cplx(1.0, 0.0), cplx(2.5, -0.5), cplx(1.2, 0.0), cplx(1.0, -1.0);
    const Eigen::VectorXd v = map_to_channels(m);
    REQUIRE(v.size() == 8);
    CHECK(v[0] == 0.0);  // background cell codes to zero
    CHECK(v[1] == 1.5);
    CHECK(v[4] == 0.0);
    CHECK(v[5] == -0.5);

    // residual decode on top of a base map
    PermittivityMap base(2);
    Eigen::VectorXd delta(8);
    delta << 0.1, 0.0, -0.2, 0.3, 0.05, 0.0, 0.0, -0.1;
    const PermittivityMap out = channels_to_map(delta, base);
    CHECK_THAT(out.values(0, 0).real(), WithinAbs(1.1, 1e-15));
    CHECK_THAT(out.values(0, 0).imag(), WithinAbs(-0.05, 1e-15));
    CHECK_THAT(out.values(1, 1).real(), WithinAbs(1.3, 1e-15));
    CHECK_THAT(out.values(1, 1).imag(), WithinAbs(0.1, 1e-15));
}

TEST_CASE("zeroed network reproduces its input map")
{
    NetworkParams p = net_init(7, 3);
    p.weight.setZero();
    PermittivityMap in(3);
    in.values(1, 2) = cplx(1.9, -0.3);
    const PermittivityMap out = net_forward(p, in);
    CHECK((out.values - in.values).norm() == 0.0);
}

TEST_CASE("net_forward is deterministic and shape-checked")
{
    const NetworkParams p = net_init(3, 4);
    PermittivityMap in(4);
    in.values(0, 0) = cplx(1.5, 0.0);
    const PermittivityMap a = net_forward(p, in);
    const PermittivityMap b = net_forward(p, in);
    CHECK((a.values - b.values).norm() == 0.0);

    PermittivityMap wrong(5);
    CHECK_THROWS_AS(net_forward(p, wrong), std::invalid_argument);
}

TEST_CASE("trace exposes consistent intermediates")
{
    NetworkParams p = net_init(2, 3);
    p.bias.setConstant(0.4);
    PermittivityMap in(3);
    in.values(2, 2) = cplx(2.0, 0.0);
    const NetTrace t = net_trace(p, in, Activation::glow);
    CHECK((t.z - (p.weight * t.input + p.bias)).norm() == 0.0);
    for (int i = 0; i < t.z.size(); ++i)
        CHECK(t.out[i] == glow(t.z[i], p.glow));
}

TEST_CASE("checkpoint round-trip is bitwise")
{
    NetworkParams p = net_init(99, 5);
    p.bias.setRandom();
    p.glow.log_c = 0.31;
    p.glow.log_sigma = -0.12;
    const std::string path = "ck_test.bin";
    save_checkpoint(path, p, 0xDEADBEEFull);

    std::uint64_t fp = 0;
    const NetworkParams q = load_checkpoint(path, &fp);
    CHECK(fp == 0xDEADBEEFull);
    CHECK(q.n_side == 5);
    CHECK((p.weight - q.weight).norm() == 0.0);
    CHECK((p.bias - q.bias).norm() == 0.0);
    CHECK(p.glow.log_c == q.glow.log_c);
    CHECK(p.glow.log_sigma == q.glow.log_sigma);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint rejects garbage")
{
    const std::string path = "ck_bad.bin";
    {
        std::ofstream f(path, std::ios::binary);
        f << "not a checkpoint at all";
    }
    CHECK_THROWS_AS(load_checkpoint(path, nullptr), std::runtime_error);
    CHECK_THROWS_AS(load_checkpoint("no_such_file.bin", nullptr), std::runtime_error);

    // truncated: valid header, missing payload
    {
        NetworkParams p = net_init(1, 4);
        save_checkpoint(path, p, 1);
        std::ifstream in(path, std::ios::binary);
        std::string data((std::istreambuf_iterator<char>(in)), {});
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(data.data(), static_cast<std::streamsize>(data.size() / 2));
    }
    CHECK_THROWS_AS(load_checkpoint(path, nullptr), std::runtime_error);
    std::remove(path.c_str());
}
