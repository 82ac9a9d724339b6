#include <cmath>
#include <doctest.h>

#include "abflux/geometry.hpp"

using namespace abflux;

namespace {
Domain unit_disk_domain(double outer = 5.0) {
    Domain d;
    d.outer = OuterRegion::disk(Vec2(0, 0), outer);
    d.obstacles.push_back(Obstacle::disk(Vec2(0, 0), 1.0));
    d.t_end = 1.0;
    return d;
}
}  // namespace

TEST_CASE("specular reflection") {
    const Vec2 r = reflect_direction(Vec2(1, 0), Vec2(-std::sqrt(3.0) / 2.0, 0.5));
    CHECK(r.x() == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(r.y() == doctest::Approx(0.8660254).epsilon(1e-6));

    const Vec2 head_on = reflect_direction(Vec2(1, 0), Vec2(-1, 0));
    CHECK(head_on.x() == doctest::Approx(-1.0));
    CHECK(head_on.y() == doctest::Approx(0.0));

    // reflected direction stays unit and flips the normal component
    const Vec2 n = Vec2(3, 4).normalized();
    const Vec2 d = Vec2(-1, 0.2).normalized();
    const Vec2 rr = reflect_direction(d, n);
    CHECK(rr.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rr.dot(n) == doctest::Approx(-d.dot(n)).epsilon(1e-14));
    CHECK((rr - rr.dot(n) * n - (d - d.dot(n) * n)).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("tangential incidence is rejected") {
    CHECK_THROWS_AS(reflect_direction(Vec2(1, 0), Vec2(0, 1)), TangentialHit);
    CHECK_THROWS_AS(reflect_direction(Vec2(1, 0), Vec2(1e-8, 1)), TangentialHit);
}

TEST_CASE("first hit against a unit disk") {
    const Domain d = unit_disk_domain();

    auto h = first_hit(Vec2(-3, 0.5), Vec2(1, 0), d, 0.0);
    REQUIRE(h.has_value());
    CHECK(h->obstacle == 0);
    CHECK(h->point.x() == doctest::Approx(-0.8660254).epsilon(1e-6));
    CHECK(h->point.y() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(h->distance == doctest::Approx(2.1339746).epsilon(1e-6));
    CHECK(h->normal.norm() == doctest::Approx(1.0).epsilon(1e-12));

    auto center = first_hit(Vec2(-3, 0), Vec2(1, 0), d, 0.0);
    REQUIRE(center.has_value());
    CHECK(center->point.x() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(center->distance == doctest::Approx(2.0).epsilon(1e-12));

    auto miss = first_hit(Vec2(-3, 2), Vec2(1, 0), d, 0.0);
    REQUIRE(miss.has_value());
    CHECK(miss->obstacle == -1);  // outer boundary
    CHECK(miss->point.norm() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("ray start on the boundary is degenerate") {
    const Domain d = unit_disk_domain();
    CHECK_THROWS_AS(first_hit(Vec2(-1, 0), Vec2(1, 0), d, 0.0), DegenerateGeometry);
}

TEST_CASE("broken-ray trace through a unit disk") {
    const Domain d = unit_disk_domain();

    SUBCASE("grazing chord misses") {
        const BrokenRay r = trace_broken_ray(Vec2(-5, 2), Vec2(1, 0), 0.0, d);
        CHECK(r.reflections.empty());
        CHECK(r.legs.size() == 1);
        CHECK(r.exit_point().norm() == doctest::Approx(5.0).epsilon(1e-10));
    }

    SUBCASE("head-on ray retroreflects") {
        const BrokenRay r = trace_broken_ray(Vec2(-5, 0), Vec2(1, 0), 0.0, d);
        REQUIRE(r.reflections.size() == 1);
        CHECK(r.reflections[0].point.x() == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(r.exit_direction().x() == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(r.exit_point().x() == doctest::Approx(-5.0).epsilon(1e-10));
        CHECK(r.total_length() == doctest::Approx(8.0).epsilon(1e-8));
    }

    SUBCASE("single oblique reflection") {
        const BrokenRay r = trace_broken_ray(Vec2(-5, 0.5), Vec2(1, 0), 0.0, d);
        REQUIRE(r.reflections.size() == 1);
        CHECK(r.reflections[0].point.x() == doctest::Approx(-0.8660254).epsilon(1e-6));
        CHECK(r.exit_direction().x() == doctest::Approx(-0.5).epsilon(1e-6));
        CHECK(r.exit_direction().y() == doctest::Approx(0.8660254).epsilon(1e-6));
        CHECK(r.exit_point().norm() == doctest::Approx(5.0).epsilon(1e-10));

        // legs stay outside the obstacle
        for (double s = 0.0; s <= r.total_length(); s += r.total_length() / 400.0)
            CHECK(d.obstacles[0].signed_distance(r.point_at(s), 0.0) >= -1e-9);
    }
}

TEST_CASE("reflection budget exhaustion traps") {
    const Domain d = unit_disk_domain();
    CHECK_THROWS_AS(trace_broken_ray(Vec2(-5, 0), Vec2(1, 0), 0.0, d, /*max_reflections=*/0),
                    TrappedRay);
}

TEST_CASE("moving obstacle is sampled at the ray time") {
    Domain d;
    d.outer = OuterRegion::disk(Vec2(0, 0), 8.0);
    d.obstacles.push_back(
        Obstacle::disk(Vec2(0, 0), 1.0).set_motion([](double t) { return Vec2(2.0 * t, 0.0); }));
    d.t_end = 2.0;
    auto h = first_hit(Vec2(-5, 0), Vec2(1, 0), d, 1.0);  // center now at (2, 0)
    REQUIRE(h.has_value());
    CHECK(h->point.x() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("polygon obstacle reflection") {
    Domain d;
    d.outer = OuterRegion::disk(Vec2(0, 0), 6.0);
    d.obstacles.push_back(
        Obstacle::polygon({Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}));
    d.t_end = 1.0;
    const BrokenRay r = trace_broken_ray(Vec2(-5, 0.3), Vec2(1, 0), 0.0, d);
    REQUIRE(r.reflections.size() == 1);
    CHECK(r.reflections[0].point.x() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.reflections[0].normal.x() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.exit_direction().x() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("rectangular outer region exit") {
    Domain d;
    d.outer = OuterRegion::rectangle(Vec2(-2, -2), Vec2(2, 2));
    d.t_end = 1.0;
    const BrokenRay r = trace_broken_ray(Vec2(-2, 0.5), Vec2(1, 0), 0.0, d);
    CHECK(r.exit_point().x() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.exit_point().y() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("domain validation rejects bad layouts") {
    SUBCASE("obstacle leaves the outer region") {
        Domain d;
        d.outer = OuterRegion::disk(Vec2(0, 0), 2.0);
        d.obstacles.push_back(
            Obstacle::disk(Vec2(0, 0), 1.0).set_motion([](double t) { return Vec2(3.0 * t, 0.0); }));
        d.t_end = 1.0;
        CHECK_THROWS_AS(d.validate(), DegenerateGeometry);
    }
    SUBCASE("overlapping obstacles") {
        Domain d;
        d.outer = OuterRegion::disk(Vec2(0, 0), 6.0);
        d.obstacles.push_back(Obstacle::disk(Vec2(0, 0), 1.0));
        d.obstacles.push_back(Obstacle::disk(Vec2(1.5, 0), 1.0));
        d.t_end = 1.0;
        CHECK_THROWS_AS(d.validate(), DegenerateGeometry);
    }
}

TEST_CASE("generator loops") {
    SUBCASE("single disk") {
        const Domain d = unit_disk_domain();
        const auto loops = generator_loops(d, 0.0, 0.5);
        REQUIRE(loops.size() == 1);
        for (const Vec2& p : loops[0]) CHECK(p.norm() == doctest::Approx(1.5).epsilon(1e-9));
        CHECK(polyline_winding(loops[0], Vec2(0, 0)) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("two disks wind independently") {
        Domain d;
        d.outer = OuterRegion::disk(Vec2(0, 0), 6.0);
        d.obstacles.push_back(Obstacle::disk(Vec2(-2, 0), 0.5));
        d.obstacles.push_back(Obstacle::disk(Vec2(2, 0), 0.5));
        d.t_end = 1.0;
        const auto loops = generator_loops(d, 0.0, 0.25);
        REQUIRE(loops.size() == 2);
        CHECK(polyline_winding(loops[0], Vec2(-2, 0)) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(polyline_winding(loops[0], Vec2(2, 0)) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(polyline_winding(loops[1], Vec2(2, 0)) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(polyline_winding(loops[1], Vec2(-2, 0)) == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("clearance exceeding the free annulus") {
        const Domain d = unit_disk_domain(2.0);
        CHECK_THROWS_AS(generator_loops(d, 0.0, 1.5), ClearanceTooLarge);
    }
}
