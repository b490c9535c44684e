#include "ipdnn/special.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace ipdnn;
using Catch::Matchers::WithinRel;

// Reference values frozen from a 30-digit arbitrary-precision evaluation.
TEST_CASE("bessel_j against frozen references")
{
    CHECK_THAT(bessel_j(0, 1.5), WithinRel(0.511827671735918129, 1e-12));
    CHECK_THAT(bessel_j(1, 2.7), WithinRel(0.441601379118253052, 1e-12));
    CHECK_THAT(bessel_j(5, 7.3), WithinRel(0.313706170897309077, 1e-12));
    CHECK_THAT(bessel_j(0, 0.37), WithinRel(0.966066726438512966, 1e-12));
    CHECK_THAT(bessel_j(1, 0.12), WithinRel(0.0598920647805634966, 1e-12));
}

TEST_CASE("bessel_y against frozen references")
{
    CHECK_THAT(bessel_y(0, 0.8), WithinRel(-0.0868022796566067184, 1e-12));
    CHECK_THAT(bessel_y(2, 3.1), WithinRel(-0.11753548143985533, 1e-12));
    CHECK_THAT(bessel_y(1, 0.37), WithinRel(-1.90550788843740045, 1e-12));
}

TEST_CASE("hankel2 composition")
{
    const double x = 2.3;
    for (int n : {0, 1, 4}) {
        const cplx h = hankel2(n, x);
        CHECK(h.real() == bessel_j(n, x));
        CHECK(h.imag() == -bessel_y(n, x));
    }
    CHECK(hankel2_0(x) == hankel2(0, x));
    CHECK(hankel2_1(x) == hankel2(1, x));
}

TEST_CASE("complex-argument J_n against frozen references")
{
    const cplx a = bessel_j_complex(0, {1.2, -0.4});
    CHECK_THAT(a.real(), WithinRel(0.691789005355568236, 1e-12));
    CHECK_THAT(a.imag(), WithinRel(0.203240057879724436, 1e-12));
    const cplx b = bessel_j_complex(3, {2.5, -1.0});
    CHECK_THAT(b.real(), WithinRel(0.202750085885166483, 1e-12));
    CHECK_THAT(b.imag(), WithinRel(-0.211683018822195817, 1e-12));
}

TEST_CASE("complex J_n reduces to real J_n on the real axis")
{
    for (double x : {0.3, 1.7, 4.2})
        for (int n : {0, 1, 3}) {
            const cplx v = bessel_j_complex(n, {x, 0.0});
            CHECK_THAT(v.real(), WithinRel(bessel_j(n, x), 1e-12));
            CHECK(std::abs(v.imag()) < 1e-15);
        }
    CHECK_THROWS_AS(bessel_j_complex(-1, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("derivative identities vs central differences")
{
    const double h = 1e-6;
    for (double x : {0.9, 2.4}) {
        for (int n : {0, 1, 2}) {
            const double fd = (bessel_j(n, x + h) - bessel_j(n, x - h)) / (2.0 * h);
            CHECK_THAT(bessel_j_prime(n, x), WithinRel(fd, 1e-8));
            const cplx fdh = (hankel2(n, x + h) - hankel2(n, x - h)) / (2.0 * h);
            CHECK(std::abs(hankel2_prime(n, x) - fdh) < 1e-7 * std::abs(fdh));
        }
        const cplx z(x, -0.3);
        const cplx fdc = (bessel_j_complex(1, z + h) - bessel_j_complex(1, z - h)) / (2.0 * h);
        CHECK(std::abs(bessel_j_complex_prime(1, z) - fdc) < 1e-7 * std::abs(fdc));
    }
}

TEST_CASE("small-argument asymptotics")
{
    // J0 -> 1, J1 ~ x/2, Y0 -> -inf direction
    CHECK_THAT(bessel_j(0, 1e-8), WithinRel(1.0, 1e-12));
    CHECK_THAT(bessel_j(1, 1e-8), WithinRel(5e-9, 1e-8));
    CHECK(bessel_y(0, 1e-8) < -5.0);
}

TEST_CASE("large-argument amplitude decay of H0")
{
    // |H0(x)| ~ sqrt(2/(pi x)); doubling x shrinks the amplitude by ~1/sqrt(2)
    const double x = 400.0;
    const double ratio = std::abs(hankel2_0(2 * x)) / std::abs(hankel2_0(x));
    CHECK_THAT(ratio, WithinRel(1.0 / std::sqrt(2.0), 1e-3));
}
