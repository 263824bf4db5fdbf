#include <catch2/catch_amalgamated.hpp>

#include "georeg/cloud_prep.hpp"

#include <map>
#include <random>
#include <set>

using namespace georeg;

namespace {

PointCloud random_cloud(uint64_t seed, std::size_t n, double extent = 50.0, double zspan = 0.3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, extent);
    std::uniform_real_distribution<double> uz(0.0, zspan);
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.push_back({u(rng), u(rng), uz(rng)});
    return c;
}

double dist(const Point3& a, const Point3& b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                     (a.z - b.z) * (a.z - b.z));
}

// O(n^2) reference: exact k nearest (by distance then index), mean/std.
struct OracleStats {
    double mu, sigma;
    std::vector<std::size_t> neigh;
};

std::vector<OracleStats> oracle_knn_stats(const PointCloud& c, int k) {
    std::vector<OracleStats> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        std::vector<std::pair<double, std::size_t>> ds;
        for (std::size_t j = 0; j < c.size(); ++j)
            if (j != i) ds.push_back({dist(c.points[i], c.points[j]), j});
        std::sort(ds.begin(), ds.end());
        ds.resize(std::min<std::size_t>(ds.size(), static_cast<std::size_t>(k)));
        double sum = 0, sum2 = 0;
        for (auto& [d, j] : ds) {
            sum += d;
            sum2 += d * d;
            out[i].neigh.push_back(j);
        }
        const double n = static_cast<double>(ds.size());
        out[i].mu = sum / n;
        out[i].sigma = std::sqrt(std::max(0.0, sum2 / n - (sum / n) * (sum / n)));
    }
    return out;
}

std::vector<bool> oracle_outlier_keep(const PointCloud& c, const PrepParams& p) {
    const auto st = oracle_knn_stats(c, p.k_neighbors);
    std::vector<bool> keep(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        std::vector<double> mus;
        for (std::size_t j : st[i].neigh) mus.push_back(st[j].mu);
        std::sort(mus.begin(), mus.end());
        const std::size_t m = mus.size();
        const double med = (m % 2) ? mus[m / 2] : 0.5 * (mus[m / 2 - 1] + mus[m / 2]);
        keep[i] = st[i].mu + p.beta_std * st[i].sigma < 2.0 * med;
    }
    return keep;
}

// Reference DBSCAN with the same symmetric rule, plain O(n^2).
std::vector<int> oracle_dbscan(const PointCloud& c, const PrepParams& p) {
    const std::size_t n = c.size();
    const int k = std::min<int>(p.k_neighbors, static_cast<int>(n) - 1);
    const auto st = oracle_knn_stats(c, k);
    std::vector<double> eps(n);
    for (std::size_t i = 0; i < n; ++i) eps[i] = p.gamma_eps * st[i].mu;

    std::vector<std::vector<std::size_t>> neigh(n);
    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (dist(c.points[i], c.points[j]) <= std::min(eps[i], eps[j])) neigh[i].push_back(j);
        core[i] = neigh[i].size() >= static_cast<std::size_t>(p.min_pts);
    }
    std::vector<int> cluster(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || cluster[i] != -1) continue;
        const int id = next++;
        std::vector<std::size_t> stack{i};
        cluster[i] = id;
        while (!stack.empty()) {
            const auto q = stack.back();
            stack.pop_back();
            for (std::size_t r : neigh[q])
                if (core[r] && cluster[r] == -1) {
                    cluster[r] = id;
                    stack.push_back(r);
                }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i] || cluster[i] != -1) continue;
        double bd = std::numeric_limits<double>::max();
        int bc = -1;
        for (std::size_t q : neigh[i]) {
            if (!core[q]) continue;
            const double d = dist(c.points[i], c.points[q]);
            if (d * d < bd || (d * d == bd && cluster[q] < bc)) {
                bd = d * d;
                bc = cluster[q];
            }
        }
        cluster[i] = bc;
    }
    std::map<int, std::size_t> sizes;
    for (int cl : cluster)
        if (cl >= 0) ++sizes[cl];
    for (auto& cl : cluster)
        if (cl >= 0 && sizes[cl] < static_cast<std::size_t>(p.min_pts)) cl = -1;
    return cluster;
}

}  // namespace

TEST_CASE("select_road_points keeps only the road label") {
    PointCloud c;
    c.points = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    c.labels = std::vector<int32_t>{1, 0, 1};
    const auto r = select_road_points(c, 1);
    REQUIRE(r.size() == 2);
    CHECK(r.points[1].x == 2.0);
    CHECK_THROWS_AS(select_road_points(c, 9), EmptyResult);
    PointCloud nolab;
    nolab.points = {{0, 0, 0}};
    CHECK_THROWS_AS(select_road_points(nolab, 1), NoLabels);
}

TEST_CASE("adaptive voxel size formula") {
    PointCloud c;
    // 1000 points in a 10x10x10 box -> s = alpha * (1000/1000)^(1/3) = alpha
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int i = 0; i < 998; ++i) c.points.push_back({u(rng), u(rng), u(rng)});
    c.points.push_back({0, 0, 0});
    c.points.push_back({10, 10, 10});
    CHECK(adaptive_voxel_size(c, 1.0) == Catch::Approx(1.0));
    CHECK(adaptive_voxel_size(c, 0.5) == Catch::Approx(0.5));
}

TEST_CASE("adaptive voxel size pads flat clouds") {
    PointCloud c;
    for (int i = 0; i < 100; ++i) c.points.push_back({double(i % 10), double(i / 10), 0.0});
    CHECK(adaptive_voxel_size(c, 1.0) > 0.0);
}

TEST_CASE("voxel downsample keeps one representative per occupied voxel") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = random_cloud(seed, 500, 20.0, 5.0);
        const double s = 1.3;
        const auto d = voxel_downsample(c, s);

        std::set<std::tuple<int64_t, int64_t, int64_t>> occupied;
        for (const auto& p : c.points)
            occupied.insert({static_cast<int64_t>(std::floor(p.x / s)),
                             static_cast<int64_t>(std::floor(p.y / s)),
                             static_cast<int64_t>(std::floor(p.z / s))});
        CHECK(d.size() == occupied.size());

        // output points are a subset of input points
        std::set<std::tuple<double, double, double>> in;
        for (const auto& p : c.points) in.insert({p.x, p.y, p.z});
        for (const auto& p : d.points) CHECK(in.count({p.x, p.y, p.z}) == 1);
    }
}

TEST_CASE("voxel downsample is idempotent") {
    const auto c = random_cloud(42, 1000, 30.0, 4.0);
    const auto once = voxel_downsample(c, 0.9);
    const auto twice = voxel_downsample(once, 0.9);
    REQUIRE(twice.size() == once.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(twice.points[i].x == once.points[i].x);
        CHECK(twice.points[i].y == once.points[i].y);
        CHECK(twice.points[i].z == once.points[i].z);
    }
}

TEST_CASE("representative is the point nearest its voxel centroid") {
    PointCloud c;
    c.points = {{0.1, 0.1, 0.1}, {0.5, 0.5, 0.5}, {0.45, 0.45, 0.45}};
    const auto d = voxel_downsample(c, 1.0);
    REQUIRE(d.size() == 1);
    // centroid is (0.35, 0.35, 0.35); nearest is the third point
    CHECK(d.points[0].x == 0.45);
}

TEST_CASE("statistical outlier removal matches the brute-force oracle") {
    PrepParams p;
    p.k_neighbors = 12;
    for (uint64_t seed = 100; seed < 120; ++seed) {
        auto c = random_cloud(seed, 300, 25.0, 0.2);
        // add some gross outliers
        std::mt19937_64 rng(seed ^ 0xff);
        std::uniform_real_distribution<double> u(0.0, 25.0);
        for (int i = 0; i < 8; ++i) c.points.push_back({u(rng), u(rng), 40.0 + 10.0 * u(rng)});

        const auto keep = oracle_outlier_keep(c, p);
        const auto got = remove_statistical_outliers(c, p);
        std::vector<Point3> want;
        for (std::size_t i = 0; i < c.size(); ++i)
            if (keep[i]) want.push_back(c.points[i]);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(got.points[i].x == want[i].x);
            CHECK(got.points[i].z == want[i].z);
        }
    }
}

TEST_CASE("isolated spikes are removed, dense interior survives") {
    PointCloud c;
    for (int x = 0; x < 20; ++x)
        for (int y = 0; y < 20; ++y) c.points.push_back({x * 0.5, y * 0.5, 0.0});
    c.points.push_back({5.0, 5.0, 30.0});  // far-off spike
    PrepParams p;
    const auto out = remove_statistical_outliers(c, p);
    bool spike_survived = false;
    for (const auto& q : out.points) spike_survived = spike_survived || q.z > 1.0;
    CHECK_FALSE(spike_survived);
    CHECK(out.size() >= 300);  // interior of the grid survives
}

TEST_CASE("dbscan matches the brute-force oracle") {
    PrepParams p;
    p.min_pts = 10;
    p.k_neighbors = 10;
    for (uint64_t seed = 200; seed < 215; ++seed) {
        // two blobs plus scatter
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> u(-40.0, 40.0);
        PointCloud c;
        for (int i = 0; i < 90; ++i) c.points.push_back({g(rng), g(rng), 0.1 * g(rng)});
        for (int i = 0; i < 70; ++i) c.points.push_back({25 + g(rng), 25 + g(rng), 0.1 * g(rng)});
        for (int i = 0; i < 12; ++i) c.points.push_back({u(rng), u(rng), 0.1 * g(rng)});

        const auto cluster = oracle_dbscan(c, p);
        std::vector<Point3> want;
        for (std::size_t i = 0; i < c.size(); ++i)
            if (cluster[i] >= 0) want.push_back(c.points[i]);
        const auto got = filter_clusters_dbscan(c, p);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(got.points[i].x == want[i].x);
            CHECK(got.points[i].y == want[i].y);
        }
    }
}

TEST_CASE("dbscan keeps dense blobs, drops scatter") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 0.8);
    PointCloud c;
    for (int i = 0; i < 120; ++i) c.points.push_back({g(rng), g(rng), 0.0});
    // distant lone points
    c.points.push_back({200.0, 0.0, 0.0});
    c.points.push_back({0.0, 220.0, 0.0});
    PrepParams p;
    const auto out = filter_clusters_dbscan(c, p);
    // a few borderline blob points may fall out; the lone points must
    CHECK(out.size() >= 110);
    for (const auto& q : out.points) CHECK(std::abs(q.x) < 50.0);
}

TEST_CASE("dbscan order independence") {
    PrepParams p;
    p.min_pts = 8;
    p.k_neighbors = 8;
    std::mt19937_64 rng(303);
    std::normal_distribution<double> g(0.0, 1.0);
    PointCloud c;
    for (int i = 0; i < 60; ++i) c.points.push_back({g(rng), g(rng), 0.0});
    for (int i = 0; i < 40; ++i) c.points.push_back({15 + g(rng), g(rng), 0.0});
    auto shuffled = c;
    std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);

    auto key = [](const Point3& q) { return std::tuple(q.x, q.y, q.z); };
    std::set<std::tuple<double, double, double>> a, b;
    for (const auto& q : filter_clusters_dbscan(c, p).points) a.insert(key(q));
    for (const auto& q : filter_clusters_dbscan(shuffled, p).points) b.insert(key(q));
    CHECK(a == b);
}

TEST_CASE("dbscan throws AllFiltered when nothing clusters") {
    // three tight groups of 10, far apart; with a small k the radii stay
    // within-group, so no point reaches min_pts = 17 neighbours
    PointCloud c;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 0.2);
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 10; ++i) c.points.push_back({b * 1000.0 + g(rng), g(rng), 0.0});
    PrepParams p;
    p.min_pts = 17;
    p.k_neighbors = 5;
    CHECK_THROWS_AS(filter_clusters_dbscan(c, p), AllFiltered);
}

TEST_CASE("rasterize_xy occupancy and padding") {
    PointCloud c;
    c.points = {{0.0, 0.0, 0.0}, {4.0, 2.0, 0.0}};
    const auto r = rasterize_xy(c, 1.0);
    CHECK(r.width == 9);   // core 5 + 2 pad each side
    CHECK(r.height == 7);  // core 3 + 4
    CHECK(r.at(2, 2) == 1);  // (0,0) lands at pixel (2,2)
    CHECK(r.at(6, 4) == 1);
    CHECK(r.count_set() == 2);
    // geo round-trips: pixel center of (2,2) is near (0.5, 0.5)
    const Vec2 w = r.geo.pixel_to_world(2, 2);
    CHECK(w.x == Catch::Approx(0.5));
    CHECK(w.y == Catch::Approx(0.5));
}

TEST_CASE("single-point cloud rasterizes into a small padded raster") {
    PointCloud c;
    c.points = {{3.0, 3.0, 0.0}};
    const auto r = rasterize_xy(c, 0.5);
    CHECK(r.width == 5);
    CHECK(r.height == 5);
    CHECK(r.count_set() == 1);
    CHECK(r.at(2, 2) == 1);
}
