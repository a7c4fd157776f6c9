#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "isoprefs/baseline_forest.hpp"
#include "isoprefs/common.hpp"
#include "isoprefs/dataset.hpp"
#include "isoprefs/datasets.hpp"
#include "isoprefs/eval.hpp"
#include "isoprefs/geometry.hpp"
#include "isoprefs/online_forest.hpp"
#include "isoprefs/parallel.hpp"
#include "isoprefs/preference.hpp"
#include "isoprefs/range_image.hpp"
#include "isoprefs/rng.hpp"
#include "isoprefs/ruzhash.hpp"
#include "isoprefs/sliding_pif.hpp"
#include "isoprefs/voronoi_forest.hpp"

// Exit codes: 0 success, 2 argument or configuration error, 3 data error
// (unreadable, unparsable, or inconsistent inputs), 4 runtime failure.

namespace {

using namespace isoprefs;
using njson = nlohmann::ordered_json;
using clock_type = std::chrono::steady_clock;

double ms_between(clock_type::time_point a, clock_type::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

ModelFamily resolve_family(const std::string& name) {
    if (name == "line") return ModelFamily{FamilyKind::line2d};
    if (name == "circle") return ModelFamily{FamilyKind::circle2d};
    if (name == "plane") return ModelFamily{FamilyKind::plane3d};
    if (name == "sphere") return ModelFamily{FamilyKind::sphere3d};
    if (name == "quadric") return ModelFamily{FamilyKind::quadric3d};
    return family_from_name(name);
}

PreferenceMode mode_from(const std::string& name) {
    return name == "binary" ? PreferenceMode::binary : PreferenceMode::continuous;
}

bool is_rimg(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && std::string_view(magic, 4) == "RIMG";
}

void append_manifest(const std::string& path, const njson& line) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot open manifest: " + path);
    out << line.dump() << '\n';
    if (!out) throw IoError("cannot write manifest: " + path);
}

// Everything one run needs, the config side of a manifest line.
struct RunConfig {
    std::string engine;
    std::string family = "line2d";
    std::string metric = "tanimoto";
    std::string mode = "continuous";
    std::string space = "preference";
    std::uint32_t t = 100;
    std::uint32_t psi = 256;
    std::uint32_t b = 2;
    double m_factor = 10.0;
    double sigma = 0.02;
    double sigma_k = 3.0;
    bool logb_norm = false;
    std::uint32_t tau = 32;
    std::uint64_t omega = 0; // 0 means the engine default (2048 for online)
    std::uint32_t eta = 32;
    std::size_t batch = 1;
    std::uint64_t budget = 1ull << 30;
    std::uint32_t s_bits = 32;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool sigma_given = false;  // sliding: explicit --sigma overrides estimation
    bool family_given = false; // sliding defaults to plane3d instead of line2d

    std::uint64_t online_window() const { return omega == 0 ? 2048 : omega; }
    ModelFamily sliding_family() const {
        return family_given ? resolve_family(family) : ModelFamily{FamilyKind::plane3d};
    }
};

void add_engine_options(CLI::App* cmd, RunConfig& cfg, bool engine_required) {
    auto* engine =
        cmd->add_option("--engine", cfg.engine, "vifor | rzhash | online | sliding | baseline")
            ->check(CLI::IsMember({"vifor", "rzhash", "online", "sliding", "baseline"}));
    if (engine_required) engine->required();
    cmd->add_option("--family", cfg.family, "model family (line, circle, plane, sphere, quadric)")
        ->check(CLI::IsMember({"line", "line2d", "circle", "circle2d", "plane", "plane3d",
                               "sphere", "sphere3d", "quadric", "quadric3d"}));
    cmd->add_option("--metric", cfg.metric, "voronoi split metric")
        ->check(CLI::IsMember({"jaccard", "ruzicka", "tanimoto", "euclidean"}));
    cmd->add_option("--mode", cfg.mode, "preference values: continuous | binary")
        ->check(CLI::IsMember({"continuous", "binary"}));
    cmd->add_option("--space", cfg.space, "score in preference or ambient space")
        ->check(CLI::IsMember({"preference", "ambient"}));
    cmd->add_option("-t,--t,--trees", cfg.t, "trees per forest");
    cmd->add_option("--psi", cfg.psi, "subsample size per tree");
    cmd->add_option("--b", cfg.b, "branching factor");
    cmd->add_option("--m-factor", cfg.m_factor, "models per point, m = m_factor * n");
    cmd->add_option("--sigma", cfg.sigma, "noise scale (sliding: per-window estimate override)");
    cmd->add_option("--sigma-k", cfg.sigma_k, "inlier threshold multiplier, epsilon = k * sigma");
    cmd->add_flag("--logb-norm", cfg.logb_norm, "normalize depths by log_b(psi)");
    cmd->add_option("--tau", cfg.tau, "online: trees");
    cmd->add_option("--omega", cfg.omega, "online: window length; sliding: window side");
    cmd->add_option("--eta", cfg.eta, "online: max leaf samples before a split");
    cmd->add_option("--batch", cfg.batch, "online: points learned per scoring step");
    cmd->add_option("--budget", cfg.budget, "sliding: preference memory budget, bytes");
    cmd->add_option("--s-bits", cfg.s_bits, "sliding: bits per preference entry in the budget");
    cmd->add_option("--seed", cfg.seed, "master seed");
    cmd->add_option("--threads", cfg.threads, "worker cap (0 = ISOPREFS_THREADS or hardware)");
}

void finish_engine_options(const CLI::App* cmd, RunConfig& cfg) {
    cfg.sigma_given = cmd->count("--sigma") > 0;
    cfg.family_given = cmd->count("--family") > 0;
    if (cfg.threads > 0) set_thread_cap(cfg.threads);
}

// All problems at once, before any work runs.
void validate_config(const RunConfig& c, std::optional<std::size_t> data_dim, bool image_input) {
    std::vector<std::string> problems;
    const bool pointwise = c.engine != "sliding";
    if (pointwise && image_input)
        problems.push_back("engine " + c.engine + " reads a point dataset, not a range image");
    if (!pointwise && !image_input)
        problems.push_back("engine sliding reads a range image, not a point dataset");

    if (c.engine == "vifor" || c.engine == "rzhash" || c.engine == "baseline") {
        if (c.t == 0) problems.push_back("--t must be positive");
        if (c.psi == 0) problems.push_back("--psi must be positive");
        if (c.engine != "baseline") {
            if (c.b < 2 || c.b > 256) problems.push_back("--b must be in [2, 256]");
            if (c.psi < c.b) problems.push_back("--psi must be at least --b");
        }
        if (c.engine == "rzhash" && c.space != "preference")
            problems.push_back("rzhash hashes preference vectors; --space ambient is undefined");
        if (c.engine == "vifor" && c.space == "ambient" && c.metric != "euclidean")
            problems.push_back("ambient space scoring uses --metric euclidean");
        if (c.space == "preference") {
            if (!(c.m_factor > 0.0)) problems.push_back("--m-factor must be positive");
            if (!(c.sigma > 0.0)) problems.push_back("--sigma must be positive");
            if (!(c.sigma_k > 0.0)) problems.push_back("--sigma-k must be positive");
            if (data_dim) {
                const ModelFamily fam = resolve_family(c.family);
                if (static_cast<std::size_t>(fam.ambient_dim()) != *data_dim)
                    problems.push_back(std::string("family ") + fam.name() + " expects " +
                                       std::to_string(fam.ambient_dim()) + "D data, input is " +
                                       std::to_string(*data_dim) + "D");
            }
        }
    } else if (c.engine == "online") {
        if (c.tau == 0) problems.push_back("--tau must be positive");
        if (c.eta == 0) problems.push_back("--eta must be positive");
        if (c.online_window() < c.eta) problems.push_back("--omega must be at least --eta");
        if (c.batch == 0) problems.push_back("--batch must be positive");
    } else if (c.engine == "sliding") {
        if (c.omega == 0) problems.push_back("sliding needs --omega, the window side in pixels");
        if (c.t == 0) problems.push_back("--t must be positive");
        if (c.b < 2 || c.b > 256) problems.push_back("--b must be in [2, 256]");
        if (c.psi < c.b) problems.push_back("--psi must be at least --b");
        if (c.budget == 0) problems.push_back("--budget must be positive");
        if (c.s_bits == 0) problems.push_back("--s-bits must be positive");
        if (c.sigma_given && !(c.sigma > 0.0)) problems.push_back("--sigma must be positive");
        if (!(c.sigma_k > 0.0)) problems.push_back("--sigma-k must be positive");
        if (c.sliding_family().ambient_dim() != 3)
            problems.push_back("sliding windows need a 3D model family");
    } else {
        problems.push_back("unknown engine: " + c.engine);
    }

    if (!problems.empty()) {
        for (const auto& p : problems) std::fprintf(stderr, "config: %s\n", p.c_str());
        throw std::invalid_argument("configuration invalid (" + std::to_string(problems.size()) +
                                    " problem" + (problems.size() == 1 ? "" : "s") + ")");
    }
}

njson config_json(const RunConfig& c) {
    njson j;
    j["engine"] = c.engine;
    if (c.engine == "vifor" || c.engine == "rzhash" || c.engine == "baseline") {
        j["space"] = c.space;
        j["t"] = c.t;
        j["psi"] = c.psi;
        if (c.engine != "baseline") j["b"] = c.b;
        if (c.engine == "vifor") j["metric"] = c.metric;
        if (c.space == "preference") {
            j["family"] = resolve_family(c.family).name();
            j["m_factor"] = c.m_factor;
            j["sigma"] = c.sigma;
            j["sigma_k"] = c.sigma_k;
            j["mode"] = c.mode;
        }
        j["logb_norm"] = c.logb_norm;
    } else if (c.engine == "online") {
        j["tau"] = c.tau;
        j["omega"] = c.online_window();
        j["eta"] = c.eta;
        j["batch"] = c.batch;
    } else if (c.engine == "sliding") {
        j["family"] = c.sliding_family().name();
        j["omega"] = c.omega;
        j["budget"] = c.budget;
        j["s_bits"] = c.s_bits;
        j["t"] = c.t;
        j["psi"] = c.psi;
        j["b"] = c.b;
        if (c.sigma_given) j["sigma"] = c.sigma;
        j["sigma_k"] = c.sigma_k;
        j["mode"] = c.mode;
        j["logb_norm"] = c.logb_norm;
    }
    j["seed"] = c.seed;
    return j;
}

struct PhaseTimes {
    double embed_ms = 0.0;
    double build_ms = 0.0;
    double score_ms = 0.0;

    double total_ms() const { return embed_ms + build_ms + score_ms; }
    njson to_json() const {
        return njson{{"embed_ms", embed_ms}, {"build_ms", build_ms}, {"score_ms", score_ms}};
    }
};

struct EngineRun {
    std::vector<double> scores;
    PhaseTimes phases;
    std::vector<std::size_t> depth_histogram;
};

void online_leaf_histogram(const OnlineNode& node, std::size_t depth,
                           std::vector<std::size_t>& hist) {
    if (node.leaf()) {
        if (hist.size() <= depth) hist.resize(depth + 1, 0);
        ++hist[depth];
        return;
    }
    online_leaf_histogram(*node.left, depth + 1, hist);
    online_leaf_histogram(*node.right, depth + 1, hist);
}

EngineRun run_online(const RunConfig& c, const Matrix& x) {
    EngineRun run;
    OnlineForestParams p;
    p.trees = c.tau;
    p.window = c.online_window();
    p.max_leaf_samples = c.eta;
    p.seed = c.seed;

    const auto t0 = clock_type::now();
    OnlineForest forest(x.cols(), p);
    run.phases.build_ms = ms_between(t0, clock_type::now());

    // Batched stream protocol: learn a batch, retire what fell out of the
    // window, then score the batch. batch = 1 reproduces the pure online
    // loop point for point.
    const auto t1 = clock_type::now();
    run.scores.resize(x.rows());
    std::deque<std::size_t> window;
    std::size_t i = 0;
    while (i < x.rows()) {
        const std::size_t end = std::min(x.rows(), i + c.batch);
        for (std::size_t j = i; j < end; ++j) {
            forest.learn(x.row(j));
            window.push_back(j);
        }
        while (window.size() > p.window) {
            forest.forget(x.row(window.front()));
            window.pop_front();
        }
        for (std::size_t j = i; j < end; ++j) run.scores[j] = forest.score(x.row(j));
        i = end;
    }
    run.phases.score_ms = ms_between(t1, clock_type::now());

    for (std::size_t t = 0; t < p.trees; ++t)
        online_leaf_histogram(forest.root(t), 0, run.depth_histogram);
    return run;
}

EngineRun run_point_engine(const RunConfig& c, const Matrix& x) {
    if (c.engine == "online") return run_online(c, x);

    EngineRun run;
    const auto t0 = clock_type::now();
    Matrix features;
    if (c.space == "preference") {
        const ModelFamily fam = resolve_family(c.family);
        const auto m = static_cast<std::size_t>(std::llround(c.m_factor * double(x.rows())));
        if (m == 0) throw std::invalid_argument("m_factor * n yields zero models");
        const auto models = sample_models(x, fam, m, derive_seed(c.seed, 0));
        const PreferenceConfig pc{c.sigma, c.sigma_k, mode_from(c.mode)};
        features = embed(x, models, pc);
        run.phases.embed_ms = ms_between(t0, clock_type::now());
    } else {
        features = x;
    }

    const auto t1 = clock_type::now();
    if (c.engine == "vifor") {
        auto shared = std::make_shared<Matrix>(std::move(features));
        VoronoiForestParams p;
        p.trees = c.t;
        p.subsample = c.psi;
        p.branching = c.b;
        p.metric = metric_from_name(c.metric);
        p.seed = derive_seed(c.seed, 1);
        p.logb_norm = c.logb_norm;
        const VoronoiForest forest(shared, p);
        const auto t2 = clock_type::now();
        run.phases.build_ms = ms_between(t1, t2);
        run.scores = forest.anomaly_scores(*shared);
        run.phases.score_ms = ms_between(t2, clock_type::now());
        run.depth_histogram = forest.leaf_depth_histogram();
    } else if (c.engine == "rzhash") {
        RzHashForestParams p;
        p.trees = c.t;
        p.subsample = c.psi;
        p.branching = c.b;
        p.seed = derive_seed(c.seed, 1);
        p.logb_norm = c.logb_norm;
        const RzHashForest forest(features, p);
        const auto t2 = clock_type::now();
        run.phases.build_ms = ms_between(t1, t2);
        run.scores = forest.anomaly_scores(features);
        run.phases.score_ms = ms_between(t2, clock_type::now());
        run.depth_histogram = forest.leaf_depth_histogram();
    } else { // baseline, on raw points or on the preference matrix
        BaselineForestParams p;
        p.trees = c.t;
        p.subsample = c.psi;
        p.seed = derive_seed(c.seed, 1);
        const BaselineForest forest(features, p);
        const auto t2 = clock_type::now();
        run.phases.build_ms = ms_between(t1, t2);
        run.scores = forest.anomaly_scores(features);
        run.phases.score_ms = ms_between(t2, clock_type::now());
        run.depth_histogram = forest.leaf_depth_histogram();
    }
    return run;
}

std::vector<double> run_sliding(const RunConfig& c, const RangeImage& image,
                                SlidingPifStats* stats) {
    SlidingPifParams p;
    p.omega = c.omega;
    p.budget_bytes = c.budget;
    p.s_bits = c.s_bits;
    p.trees = c.t;
    p.subsample = c.psi;
    p.branching = c.b;
    p.seed = c.seed;
    p.k_multiplier = c.sigma_k;
    p.mode = mode_from(c.mode);
    if (c.sigma_given) p.sigma_override = c.sigma;
    p.logb_norm = c.logb_norm;
    return sliding_pif(image, c.sliding_family(), p, stats);
}

struct MapEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double score = 0.0;
};

std::vector<MapEntry> read_score_map_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open score map: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "row,col,score")
        throw IoError("score map header must be row,col,score: " + path);
    std::vector<MapEntry> entries;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        MapEntry e;
        char* cursor = nullptr;
        e.row = std::strtoull(line.c_str(), &cursor, 10);
        if (cursor == line.c_str() || *cursor != ',')
            throw IoError("bad score map row: " + line);
        const char* next = cursor + 1;
        e.col = std::strtoull(next, &cursor, 10);
        if (cursor == next || *cursor != ',') throw IoError("bad score map row: " + line);
        next = cursor + 1;
        e.score = std::strtod(next, &cursor);
        if (cursor == next) throw IoError("bad score map row: " + line);
        entries.push_back(e);
    }
    return entries;
}

// Pixel scores joined with the image ground truth; NaN entries (invalid or
// uncovered pixels) drop out of the ranking.
double image_auc(const RangeImage& image, const std::vector<double>& map) {
    if (!image.has_gt()) throw IoError("range image carries no ground truth mask");
    if (map.size() != image.pixels())
        throw LengthMismatch("score map size does not match the image");
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (std::isnan(map[i])) continue;
        scores.push_back(map[i]);
        labels.push_back(image.gt_mask[i] ? 1 : 0);
    }
    return roc_auc(scores, labels);
}

// generate ------------------------------------------------------------------

struct GenerateOpts {
    std::string kind;
    std::string out;
    std::uint64_t seed = 0;
    std::uint32_t scale = 1;
    std::string shape = "plane";
    std::size_t side = 200;
    double sigma = 0.01;
    bool pit = false;
    std::size_t pit_row = SIZE_MAX; // SIZE_MAX = image center
    std::size_t pit_col = SIZE_MAX;
    double pit_radius = 8.0;
    double pit_depth = 10.0;
    std::size_t n = 10000;
    std::size_t d = 4;
    double rate = 0.02;
    std::size_t drift_at = 0;
};

LabeledDataset make_stream(std::size_t n, std::size_t d, double rate, std::size_t drift_at,
                           std::uint64_t seed) {
    StreamSpec spec;
    spec.n = n;
    spec.d = d;
    spec.anomaly_rate = rate;
    spec.clusters = {{std::vector<double>(d, 0.0), 1.0, 0.5},
                     {std::vector<double>(d, 10.0), 1.0, 0.5}};
    if (drift_at > 0)
        spec.drift = {{drift_at,
                       {{std::vector<double>(d, 3.0), 1.0, 0.5},
                        {std::vector<double>(d, 13.0), 1.0, 0.5}}}};
    return generate_stream(spec, seed);
}

int do_generate(const GenerateOpts& g) {
    if (g.kind == "surface") {
        std::optional<SurfaceDefect> defect;
        if (g.pit) {
            SurfaceDefect pit;
            pit.row = g.pit_row == SIZE_MAX ? g.side / 2 : g.pit_row;
            pit.col = g.pit_col == SIZE_MAX ? g.side / 2 : g.pit_col;
            pit.radius_px = g.pit_radius;
            pit.depth_sigmas = g.pit_depth;
            defect = pit;
        }
        const RangeImage image =
            generate_surface_grid(surface_from_name(g.shape), g.side, g.sigma, defect, g.seed);
        write_range_image(g.out, image);
        std::size_t marked = 0;
        for (const auto flag : image.gt_mask) marked += flag != 0;
        std::printf("wrote %s: n=%zu d=3 anomalies=%s\n", g.out.c_str(), image.pixels(),
                    format_g9(double(marked) / double(image.pixels())).c_str());
        return 0;
    }

    LabeledDataset data;
    if (g.kind == "stream") {
        data = make_stream(g.n, g.d, g.rate, g.drift_at, g.seed);
    } else {
        data = generate_primitive_2d(primitive_from_name(g.kind), g.seed, g.scale);
    }
    write_dataset_csv(g.out, data);
    std::size_t anomalies = 0;
    for (const int label : data.labels) anomalies += label == 1;
    std::printf("wrote %s: n=%zu d=%zu anomalies=%s\n", g.out.c_str(), data.size(), data.dim(),
                format_g9(double(anomalies) / double(data.size())).c_str());
    return 0;
}

// score ---------------------------------------------------------------------

struct ScoreOpts {
    RunConfig cfg;
    std::string in;
    std::string out;
    std::string manifest;
};

int do_score(const ScoreOpts& s) {
    const bool image_input = is_rimg(s.in);
    validate_config(s.cfg, std::nullopt, image_input);

    njson manifest;
    manifest["cmd"] = "score";
    manifest["in"] = s.in;
    manifest["out"] = s.out;

    if (s.cfg.engine == "sliding") {
        const RangeImage image = read_range_image(s.in);
        SlidingPifStats stats;
        const auto t0 = clock_type::now();
        const std::vector<double> map = run_sliding(s.cfg, image, &stats);
        const double wall = ms_between(t0, clock_type::now());
        write_score_map_csv(s.out, image, map);

        manifest["config"] = config_json(s.cfg);
        manifest["n"] = image.pixels();
        manifest["wall_ms"] = wall;
        manifest["windows_total"] = stats.windows_total;
        manifest["windows_skipped"] = stats.windows_skipped;
        manifest["models_per_window"] = stats.models_per_window;
        manifest["max_window_bytes"] = stats.max_window_bytes;
        append_manifest(s.manifest, manifest);
        std::printf("scored n=%zu engine=sliding wall_ms=%s -> %s\n", image.pixels(),
                    format_g9(wall).c_str(), s.out.c_str());
        return 0;
    }

    const LabeledDataset data = read_dataset_csv(s.in);
    validate_config(s.cfg, data.dim(), false);
    const auto t0 = clock_type::now();
    const EngineRun run = run_point_engine(s.cfg, data.points);
    const double wall = ms_between(t0, clock_type::now());
    write_scores_csv(s.out, run.scores);

    manifest["config"] = config_json(s.cfg);
    manifest["n"] = data.size();
    manifest["d"] = data.dim();
    manifest["wall_ms"] = wall;
    manifest["phases"] = run.phases.to_json();
    manifest["depth_histogram"] = run.depth_histogram;
    append_manifest(s.manifest, manifest);
    std::printf("scored n=%zu engine=%s wall_ms=%s -> %s\n", data.size(), s.cfg.engine.c_str(),
                format_g9(wall).c_str(), s.out.c_str());
    return 0;
}

// eval ----------------------------------------------------------------------

struct EvalOpts {
    RunConfig cfg;
    std::string data;
    std::string scores;
    std::uint32_t runs = 1;
    bool as_json = false;
};

int do_eval(const EvalOpts& e) {
    if (!e.scores.empty()) {
        // File mode: one AUC from existing score and label files.
        if (e.runs != 1)
            throw std::invalid_argument("--runs repeats seeded engine runs; omit --scores");
        double auc = 0.0;
        std::size_t n = 0;
        if (is_rimg(e.data)) {
            const RangeImage image = read_range_image(e.data);
            std::vector<double> map(image.pixels(), std::numeric_limits<double>::quiet_NaN());
            for (const MapEntry& entry : read_score_map_csv(e.scores)) {
                if (entry.row >= image.height || entry.col >= image.width)
                    throw LengthMismatch("score map pixel outside the image");
                map[image.index(entry.row, entry.col)] = entry.score;
            }
            auc = image_auc(image, map);
            n = image.pixels();
        } else {
            const LabeledDataset data = read_dataset_csv(e.data);
            const std::vector<double> scores = read_scores_csv(e.scores);
            if (scores.size() != data.size())
                throw LengthMismatch("scores and labels disagree in length: " +
                                     std::to_string(scores.size()) + " vs " +
                                     std::to_string(data.size()));
            auc = roc_auc(scores, data.labels);
            n = data.size();
        }
        if (e.as_json) {
            njson j{{"auc", auc}, {"n", n}};
            std::printf("%s\n", j.dump().c_str());
        } else {
            std::printf("auc %s\n", format_g9(auc).c_str());
        }
        return 0;
    }

    // Engine mode: rerun the configured engine with seeds seed..seed+R-1.
    if (e.cfg.engine.empty())
        throw std::invalid_argument("eval needs --scores (file mode) or --engine (run mode)");
    const bool image_input = is_rimg(e.data);
    validate_config(e.cfg, std::nullopt, image_input);

    std::vector<double> aucs;
    if (image_input) {
        const RangeImage image = read_range_image(e.data);
        for (std::uint32_t r = 0; r < e.runs; ++r) {
            RunConfig cfg = e.cfg;
            cfg.seed = e.cfg.seed + r;
            aucs.push_back(image_auc(image, run_sliding(cfg, image, nullptr)));
        }
    } else {
        const LabeledDataset data = read_dataset_csv(e.data);
        validate_config(e.cfg, data.dim(), false);
        for (std::uint32_t r = 0; r < e.runs; ++r) {
            RunConfig cfg = e.cfg;
            cfg.seed = e.cfg.seed + r;
            aucs.push_back(roc_auc(run_point_engine(cfg, data.points).scores, data.labels));
        }
    }

    double mean = 0.0;
    for (const double a : aucs) mean += a;
    mean /= double(aucs.size());
    double var = 0.0;
    for (const double a : aucs) var += (a - mean) * (a - mean);
    const double std_dev = aucs.size() > 1 ? std::sqrt(var / double(aucs.size() - 1)) : 0.0;

    if (e.as_json) {
        njson j{{"engine", e.cfg.engine},
                {"runs", e.runs},
                {"aucs", aucs},
                {"mean", mean},
                {"std", std_dev}};
        std::printf("%s\n", j.dump().c_str());
    } else if (e.runs == 1) {
        std::printf("auc %s\n", format_g9(aucs[0]).c_str());
    } else {
        std::printf("auc mean %s std %s runs %u\n", format_g9(mean).c_str(),
                    format_g9(std_dev).c_str(), e.runs);
    }
    return 0;
}

// bench ---------------------------------------------------------------------

struct BenchOpts {
    RunConfig cfg;
    std::string in;
    std::string out;
    std::string manifest;
    std::vector<std::uint32_t> b_sweep;
    std::vector<std::size_t> n_sweep;
    std::vector<std::string> phases;
    std::size_t d = 4;
    double rate = 0.02;
};

int do_bench(const BenchOpts& b) {
    if (b.b_sweep.empty() == b.n_sweep.empty())
        throw std::invalid_argument("bench needs exactly one of --b-sweep or --n-sweep");

    auto keep_phase = [&b](const char* name) {
        return b.phases.empty() ||
               std::find(b.phases.begin(), b.phases.end(), name) != b.phases.end();
    };

    std::string csv = "engine,sweep,value,phase,wall_ms\n";
    auto add_row = [&](const char* sweep, std::uint64_t value, const char* phase, double ms) {
        if (!keep_phase(phase)) return;
        csv += b.cfg.engine + "," + sweep + "," + std::to_string(value) + "," + phase + "," +
               format_g9(ms) + "\n";
    };
    std::size_t rows = 0;

    if (!b.b_sweep.empty()) {
        if (b.cfg.engine != "vifor" && b.cfg.engine != "rzhash")
            throw std::invalid_argument("--b-sweep applies to vifor and rzhash");
        if (b.in.empty()) throw std::invalid_argument("--b-sweep needs an input dataset (--in)");
        const LabeledDataset data = read_dataset_csv(b.in);
        for (const std::uint32_t value : b.b_sweep) {
            RunConfig cfg = b.cfg;
            cfg.b = value;
            validate_config(cfg, data.dim(), false);
            const EngineRun run = run_point_engine(cfg, data.points);
            add_row("b", value, "embed", run.phases.embed_ms);
            add_row("b", value, "build", run.phases.build_ms);
            add_row("b", value, "score", run.phases.score_ms);
            rows += 3;
            njson line{{"cmd", "bench"},       {"sweep", "b"},
                       {"value", value},       {"config", config_json(cfg)},
                       {"n", data.size()},     {"phases", run.phases.to_json()},
                       {"depth_histogram", run.depth_histogram}};
            append_manifest(b.manifest, line);
        }
    } else {
        if (b.cfg.engine != "online")
            throw std::invalid_argument("--n-sweep applies to the online engine");
        validate_config(b.cfg, std::nullopt, false);
        for (const std::size_t value : b.n_sweep) {
            if (value == 0) throw std::invalid_argument("--n-sweep values must be positive");
            const LabeledDataset data = make_stream(value, b.d, b.rate, 0, b.cfg.seed);
            const EngineRun run = run_point_engine(b.cfg, data.points);
            add_row("n", value, "build", run.phases.build_ms);
            add_row("n", value, "score", run.phases.score_ms);
            rows += 2;
            njson line{{"cmd", "bench"},   {"sweep", "n"},
                       {"value", value},   {"config", config_json(b.cfg)},
                       {"n", value},       {"phases", run.phases.to_json()}};
            append_manifest(b.manifest, line);
        }
    }

    if (b.out.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream out(b.out);
        if (!out || !(out << csv)) throw IoError("cannot write " + b.out);
        std::printf("wrote %s: %zu timing rows\n", b.out.c_str(), rows);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"preference and online isolation forests"};
    app.require_subcommand(1);

    GenerateOpts gen;
    auto* cmd_gen = app.add_subcommand("generate", "write a seeded synthetic benchmark");
    cmd_gen
        ->add_option("--kind", gen.kind,
                     "stair3 | stair4 | star5 | star11 | circle3 | circle4 | circle5 | "
                     "surface | stream")
        ->required()
        ->check(CLI::IsMember({"stair3", "stair4", "star5", "star11", "circle3", "circle4",
                               "circle5", "surface", "stream"}));
    cmd_gen->add_option("-o,--out", gen.out, "output file (CSV, or RIMG for surface)")
        ->required();
    cmd_gen->add_option("--seed", gen.seed, "generator seed");
    cmd_gen->add_option("--scale", gen.scale, "primitives: per-structure point multiplier");
    cmd_gen->add_option("--shape", gen.shape, "surface: plane | paraboloid | sphere_cap")
        ->check(CLI::IsMember({"plane", "paraboloid", "sphere_cap"}));
    cmd_gen->add_option("--side", gen.side, "surface: grid side in pixels");
    cmd_gen->add_option("--sigma", gen.sigma, "surface: z noise scale");
    cmd_gen->add_flag("--pit", gen.pit, "surface: carve a defect pit");
    cmd_gen->add_option("--pit-row", gen.pit_row, "surface: pit center row (default center)");
    cmd_gen->add_option("--pit-col", gen.pit_col, "surface: pit center column (default center)");
    cmd_gen->add_option("--pit-radius", gen.pit_radius, "surface: pit radius in pixels");
    cmd_gen->add_option("--pit-depth", gen.pit_depth, "surface: pit depth in noise sigmas");
    cmd_gen->add_option("--n", gen.n, "stream: number of points");
    cmd_gen->add_option("--d", gen.d, "stream: dimensions");
    cmd_gen->add_option("--rate", gen.rate, "stream: anomaly rate");
    cmd_gen->add_option("--drift-at", gen.drift_at, "stream: index where the clusters shift");

    ScoreOpts score;
    auto* cmd_score = app.add_subcommand("score", "run an engine and write per-point scores");
    cmd_score->add_option("-i,--in", score.in, "input dataset (CSV or RIMG)")->required();
    cmd_score->add_option("-o,--out", score.out, "output scores CSV")->required();
    cmd_score->add_option("--manifest", score.manifest, "JSON-lines run manifest to append to");
    add_engine_options(cmd_score, score.cfg, true);

    EvalOpts eval;
    auto* cmd_eval = app.add_subcommand("eval", "ROC AUC from files or seeded engine reruns");
    cmd_eval->add_option("--data", eval.data, "labeled dataset (CSV or RIMG)")->required();
    cmd_eval->add_option("--scores", eval.scores, "existing scores file (file mode)");
    cmd_eval->add_option("--runs", eval.runs, "seeded repetitions (engine mode)");
    cmd_eval->add_flag("--json", eval.as_json, "machine readable output");
    add_engine_options(cmd_eval, eval.cfg, false);

    BenchOpts bench;
    auto* cmd_bench = app.add_subcommand("bench", "phase timings across a parameter sweep");
    cmd_bench->add_option("-i,--in", bench.in, "input dataset for --b-sweep");
    cmd_bench->add_option("-o,--out", bench.out, "timing CSV (default stdout)");
    cmd_bench->add_option("--manifest", bench.manifest, "JSON-lines run manifest to append to");
    cmd_bench->add_option("--b-sweep", bench.b_sweep, "branching factors, e.g. 2,4,8")
        ->delimiter(',');
    cmd_bench->add_option("--n-sweep", bench.n_sweep, "stream lengths, e.g. 100000,200000")
        ->delimiter(',');
    cmd_bench->add_option("--phases", bench.phases, "subset of embed,build,score")
        ->delimiter(',')
        ->check(CLI::IsMember({"embed", "build", "score"}));
    cmd_bench->add_option("--d", bench.d, "n-sweep: stream dimensions");
    cmd_bench->add_option("--rate", bench.rate, "n-sweep: stream anomaly rate");
    add_engine_options(cmd_bench, bench.cfg, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(cmd_gen)) return do_generate(gen);
        if (app.got_subcommand(cmd_score)) {
            finish_engine_options(cmd_score, score.cfg);
            return do_score(score);
        }
        if (app.got_subcommand(cmd_eval)) {
            finish_engine_options(cmd_eval, eval.cfg);
            if (cmd_eval->count("--engine") == 0) eval.cfg.engine.clear();
            return do_eval(eval);
        }
        finish_engine_options(cmd_bench, bench.cfg);
        return do_bench(bench);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const LengthMismatch& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const DegenerateLabels& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const DegenerateSample& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
