#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "textsimp/checkpoint.hpp"
#include "textsimp/cli.hpp"
#include "textsimp/corpus.hpp"
#include "textsimp/errors.hpp"
#include "textsimp/lexsimp.hpp"
#include "textsimp/manifest.hpp"
#include "textsimp/metrics.hpp"
#include "textsimp/rng.hpp"
#include "textsimp/seq2seq.hpp"
#include "textsimp/text.hpp"

using namespace textsimp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        static int counter = 0;
        dir = fs::temp_directory_path() /
              ("textsimp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct RunResult {
    int code = 0;
    std::string out;
    std::string err;
};

// Runs the CLI in-process with stdout/stderr captured.
RunResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
    std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
    const int code = run_cli(args);
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return {code, out.str(), err.str()};
}

int count_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    int n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// manifest plumbing
// ---------------------------------------------------------------------------

TEST_CASE("manifests round-trip through JSON") {
    TempDir t;
    write_file(t.path("in.txt"), "payload\n");
    Manifest m;
    m.command = "pretrain";
    m.seed = 42;
    m.options = {{"corpus", "in.txt"}, {"epochs", "3"}};
    m.record_input(t.path("in.txt"));
    m.stats = {{"sentences", 7}};
    m.write(t.path("m.json"));

    const Manifest back = Manifest::load(t.path("m.json"));
    CHECK(back.command == "pretrain");
    CHECK(back.version == kToolkitVersion);
    CHECK(back.seed == 42);
    CHECK(back.options == m.options);
    CHECK(back.inputs == m.inputs);
    CHECK(back.stats == m.stats);
}

TEST_CASE("file hashes match direct hashing of the bytes") {
    TempDir t;
    const std::string content = "two lines\nof data\n";
    write_file(t.path("x.bin"), content);
    std::ostringstream expected;
    expected << std::hex << std::setfill('0') << std::setw(16) << fnv1a64(content);
    CHECK(hash_file_hex(t.path("x.bin")) == expected.str());
    CHECK_THROWS_AS(hash_file_hex(t.path("absent.bin")), IoError);
}

TEST_CASE("malformed manifests are rejected as data errors") {
    TempDir t;
    write_file(t.path("broken.json"), "{ not json");
    CHECK_THROWS_AS(Manifest::load(t.path("broken.json")), FormatError);
    write_file(t.path("partial.json"), R"({"command":"prepare"})");
    CHECK_THROWS_AS(Manifest::load(t.path("partial.json")), FormatError);
    CHECK_THROWS_AS(Manifest::load(t.path("absent.json")), IoError);
}

// ---------------------------------------------------------------------------
// option and config parsing
// ---------------------------------------------------------------------------

TEST_CASE("typed option accessors parse strictly") {
    const std::map<std::string, std::string> opts = {
        {"n", "12"},  {"neg", "-3"},   {"big", "18446744073709551615"}, {"f", "2.5e-1"},
        {"yes", "true"}, {"no", "0"},  {"junk", "12x"},                 {"empty", ""}};
    CHECK(opt_int(opts, "n") == 12);
    CHECK(opt_int(opts, "neg") == -3);
    CHECK(opt_u64(opts, "big") == 18446744073709551615ULL);
    CHECK(opt_double(opts, "f") == 0.25);
    CHECK(opt_bool(opts, "yes"));
    CHECK_FALSE(opt_bool(opts, "no"));
    CHECK(opt_str(opts, "junk") == "12x");
    CHECK_THROWS_AS(opt_int(opts, "junk"), UsageError);
    CHECK_THROWS_AS(opt_int(opts, "empty"), UsageError);
    CHECK_THROWS_AS(opt_u64(opts, "neg"), UsageError);
    CHECK_THROWS_AS(opt_double(opts, "junk"), UsageError);
    CHECK_THROWS_AS(opt_bool(opts, "junk"), UsageError);
    CHECK_THROWS_AS(opt_str(opts, "missing"), UsageError);
}

TEST_CASE("config files are flat key = value with comments") {
    TempDir t;
    write_file(t.path("a.cfg"),
               "# comment\n"
               "\n"
               "epochs = 5\n"
               "  out=  spaced value  \n"
               "empty =\n");
    const auto pairs = parse_config_file(t.path("a.cfg"));
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0] == std::pair<std::string, std::string>("epochs", "5"));
    CHECK(pairs[1] == std::pair<std::string, std::string>("out", "spaced value"));
    CHECK(pairs[2] == std::pair<std::string, std::string>("empty", ""));

    write_file(t.path("b.cfg"), "no equals sign\n");
    CHECK_THROWS_AS(parse_config_file(t.path("b.cfg")), FormatError);
    write_file(t.path("c.cfg"), "= value\n");
    CHECK_THROWS_AS(parse_config_file(t.path("c.cfg")), FormatError);
    CHECK_THROWS_AS(parse_config_file(t.path("absent.cfg")), IoError);
}

TEST_CASE("comma lists split with trimming") {
    CHECK(split_list("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_list(" a , b ") == std::vector<std::string>{"a", "b"});
    CHECK(split_list("a,,b") == std::vector<std::string>{"a", "b"});
    CHECK(split_list("").empty());
}

TEST_CASE("rows written for lexical simplification read back intact") {
    TempDir t;
    const std::vector<SimplifyResult> results = {
        {"convened", "held", {{"held", 0.9}, {"kept", 0.4}}},
        {"odd", "", {}},
    };
    write_ls_outputs(results, t.path("rows.tsv"));
    const std::vector<LsOutput> rows = read_ls_outputs(t.path("rows.tsv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].target == "convened");
    CHECK(rows[0].chosen == "held");
    CHECK(rows[0].candidates == std::vector<std::string>{"held", "kept"});
    CHECK(rows[1].target == "odd");
    CHECK(rows[1].chosen.empty());
    CHECK(rows[1].candidates.empty());

    write_file(t.path("two.tsv"), "a\tb\n");
    CHECK_THROWS_AS(read_ls_outputs(t.path("two.tsv")), FormatError);
    write_file(t.path("four.tsv"), "a\tb\tc\td\n");
    CHECK_THROWS_AS(read_ls_outputs(t.path("four.tsv")), FormatError);
    write_file(t.path("anon.tsv"), "\tb\tc\n");
    CHECK_THROWS_AS(read_ls_outputs(t.path("anon.tsv")), FormatError);
    write_file(t.path("gap.tsv"), "a\tb\tc,,d\n");
    CHECK_THROWS_AS(read_ls_outputs(t.path("gap.tsv")), FormatError);
}

// ---------------------------------------------------------------------------
// prepare and gen-synth
// ---------------------------------------------------------------------------

TEST_CASE("prepare filters, dedups, and reports counts") {
    TempDir t;
    write_file(t.path("raw.txt"),
               "the small house on the hill looks nice today\n"
               "too short here\n"
               "the SMALL house on the hill looks nice today\n"
               "a very happy dog ran across the green field\n");
    write_file(t.path("test.txt"), "The small house on the hill looks NICE today\n");
    const RunResult r = run({"prepare", "--corpus", t.path("raw.txt"), "--test-sets",
                             t.path("test.txt"), "--out", t.path("clean.txt")});
    REQUIRE(r.code == 0);
    CHECK(read_file(t.path("clean.txt")) == "a very happy dog ran across the green field\n");

    const Manifest m = Manifest::load(t.path("clean.txt.manifest.json"));
    CHECK(m.command == "prepare");
    CHECK(m.stats.at("loaded") == 4);
    CHECK(m.stats.at("after_short_filter") == 3);
    CHECK(m.stats.at("after_dedup") == 1);
    CHECK(m.stats.at("dedup_removed") == 2);
    CHECK(m.inputs.count(t.path("raw.txt")) == 1);
    CHECK(m.inputs.count(t.path("test.txt")) == 1);

    // the guarantee the command exists for: no overlap with the test set
    const std::set<std::string> held_out = load_normalized_lines(t.path("test.txt"));
    for (const Sentence& s : load_corpus(t.path("clean.txt"), CorpusFormat::PlainLines))
        CHECK(held_out.count(normalize_sentence(s.tokens)) == 0);
}

TEST_CASE("prepare rejects an empty corpus by name") {
    TempDir t;
    write_file(t.path("empty.txt"), "");
    const RunResult r =
        run({"prepare", "--corpus", t.path("empty.txt"), "--out", t.path("out.txt")});
    CHECK(r.code == 2);
    CHECK(r.err.find("no sentences") != std::string::npos);
}

TEST_CASE("gen-synth writes corpus, lexicon, and slots deterministically") {
    TempDir t;
    const std::vector<std::string> args = {
        "gen-synth",      "--sentences", "50",
        "--out",          t.path("c.txt"),
        "--lexicon-out",  t.path("lex.tsv"),
        "--slots-out",    t.path("slots.tsv"),
        "--seed",         "11"};
    REQUIRE(run(args).code == 0);
    CHECK(count_lines(t.path("c.txt")) == 50);
    CHECK(count_lines(t.path("lex.tsv")) > 0);
    CHECK(count_lines(t.path("slots.tsv")) >= 50);

    const std::string first = read_file(t.path("c.txt"));
    const std::string first_manifest = read_file(t.path("c.txt.manifest.json"));
    REQUIRE(run(args).code == 0);
    CHECK(read_file(t.path("c.txt")) == first);
    CHECK(read_file(t.path("c.txt.manifest.json")) == first_manifest);

    std::vector<std::string> other = args;
    other.back() = "12";
    REQUIRE(run(other).code == 0);
    CHECK(read_file(t.path("c.txt")) != first);
}

// ---------------------------------------------------------------------------
// pretrain, precedence, and manifest replay
// ---------------------------------------------------------------------------

namespace {

// Small synthetic corpus + lexicon + model, shared by the heavier cases.
struct PretrainFixture {
    TempDir t;
    std::vector<std::string> pretrain_args;

    PretrainFixture() {
        REQUIRE(run({"gen-synth", "--sentences", "60", "--out", t.path("c.txt"),
                     "--lexicon-out", t.path("lex.tsv"), "--seed", "21"})
                    .code == 0);
        pretrain_args = {"pretrain",        "--corpus",     t.path("c.txt"),
                         "--lexicon",       t.path("lex.tsv"),
                         "--layers",        "1",
                         "--heads",         "2",
                         "--d-model",       "16",
                         "--d-ff",          "32",
                         "--max-seq-len",   "16",
                         "--epochs",        "2",
                         "--batch-size",    "8",
                         "--grad-accum",    "1",
                         "--learning-rate", "1e-3",
                         "--out",           t.path("m.ckpt"),
                         "--seed",          "5"};
    }
};

}  // namespace

TEST_CASE("pretrain produces a loadable checkpoint and a replayable manifest") {
    PretrainFixture f;
    const RunResult r = run(f.pretrain_args);
    REQUIRE(r.code == 0);

    const ModelParams params = load_model_checkpoint(f.t.path("m.ckpt"), "mlm");
    CHECK(params.config.d_model == 16);

    const Manifest m = Manifest::load(f.t.path("m.ckpt.manifest.json"));
    CHECK(m.command == "pretrain");
    CHECK(m.seed == 5);
    CHECK(m.options.at("mode") == "selective");
    CHECK(m.stats.at("sentences") == 60);
    CHECK(m.stats.at("total_masks") > 0);

    // replay from the manifest: bit-identical checkpoint and manifest
    const std::string ckpt_bytes = read_file(f.t.path("m.ckpt"));
    const std::string manifest_bytes = read_file(f.t.path("m.ckpt.manifest.json"));
    const RunResult replay = run({"--from-manifest", f.t.path("m.ckpt.manifest.json")});
    REQUIRE(replay.code == 0);
    CHECK(read_file(f.t.path("m.ckpt")) == ckpt_bytes);
    CHECK(read_file(f.t.path("m.ckpt.manifest.json")) == manifest_bytes);
}

TEST_CASE("flags beat the config file, which beats the defaults") {
    TempDir t;
    write_file(t.path("gs.cfg"), "sentences = 30\nseed = 9\n");
    REQUIRE(run({"gen-synth", "--config", t.path("gs.cfg"), "--out", t.path("a.txt")}).code == 0);
    CHECK(count_lines(t.path("a.txt")) == 30);
    const Manifest m = Manifest::load(t.path("a.txt.manifest.json"));
    CHECK(m.seed == 9);
    CHECK(m.options.at("easy-fill-prob") == "0.5");  // untouched default

    REQUIRE(run({"gen-synth", "--config", t.path("gs.cfg"), "--sentences", "20", "--out",
                 t.path("b.txt")})
                .code == 0);
    CHECK(count_lines(t.path("b.txt")) == 20);

    write_file(t.path("bad.cfg"), "frobnicate = 1\n");
    const RunResult r =
        run({"gen-synth", "--config", t.path("bad.cfg"), "--out", t.path("c.txt")});
    CHECK(r.code == 2);
    CHECK(r.err.find("frobnicate") != std::string::npos);
}

TEST_CASE("usage, data, and numeric failures map to exit codes 2, 3, 4") {
    PretrainFixture f;
    CHECK(run({"pretrain", "--corpus", f.t.path("c.txt")}).code == 2);       // missing --out
    CHECK(run({"pretrain", "--corpus", f.t.path("c.txt"), "--out", f.t.path("x.ckpt"), "--mode",
               "sideways"})
              .code == 2);
    CHECK(run({"nosuchcommand"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"--version"}).code == 0);
    CHECK(run({"gen-synth", "--out", f.t.path("g.txt"), "--easy-fill-prob", "1.5"}).code == 2);

    write_file(f.t.path("bad.tsv"), "row without tabs\n");
    CHECK(run({"eval-sg", "--checkpoint", f.t.path("nope.ckpt"), "--dataset", f.t.path("bad.tsv"),
               "--out", f.t.path("y.tsv")})
              .code == 3);  // unreadable checkpoint reported as an IO problem

    write_file(f.t.path("broken.json"), "{");
    CHECK(run({"--from-manifest", f.t.path("broken.json")}).code == 3);

    std::vector<std::string> blow = f.pretrain_args;
    blow[blow.size() - 5] = "1e300";  // learning-rate value
    const RunResult r = run(blow);
    CHECK(r.code == 4);
    CHECK(r.err.find("non-finite") != std::string::npos);
}

TEST_CASE("from-manifest and an explicit subcommand cannot be combined") {
    PretrainFixture f;
    REQUIRE(run(f.pretrain_args).code == 0);
    const RunResult r = run({"--from-manifest", f.t.path("m.ckpt.manifest.json"), "gen-synth",
                             "--out", f.t.path("z.txt")});
    CHECK(r.code == 2);
}

// ---------------------------------------------------------------------------
// evaluation commands
// ---------------------------------------------------------------------------

TEST_CASE("eval-sg and eval-pipeline write aligned outputs and scores") {
    PretrainFixture f;
    REQUIRE(run(f.pretrain_args).code == 0);

    // targets chosen from corpus sentences; gold sets are arbitrary words
    std::ostringstream dataset;
    const auto corpus = load_corpus(f.t.path("c.txt"), CorpusFormat::PlainLines);
    REQUIRE(corpus.size() >= 4);
    for (int i = 0; i < 4; ++i)
        dataset << join_tokens(corpus[i].tokens) << "\t1\t" << corpus[i].tokens[1]
                << "\tsmall\tbig\n";
    write_file(f.t.path("ls.tsv"), dataset.str());

    const RunResult sg = run({"eval-sg", "--checkpoint", f.t.path("m.ckpt"), "--dataset",
                              f.t.path("ls.tsv"), "--k", "3", "--out", f.t.path("sg.tsv")});
    REQUIRE(sg.code == 0);
    const std::vector<LsOutput> sg_rows = read_ls_outputs(f.t.path("sg.tsv"));
    REQUIRE(sg_rows.size() == 4);
    for (const LsOutput& row : sg_rows) {
        CHECK(row.chosen.empty());
        CHECK(row.candidates.size() <= 3);
    }
    const json sg_scores = json::parse(read_file(f.t.path("sg.tsv.scores.json")));
    CHECK(sg_scores.contains("precision"));
    CHECK(sg_scores.contains("recall"));
    CHECK(sg_scores.contains("f1"));

    const RunResult pipe =
        run({"eval-pipeline", "--checkpoint", f.t.path("m.ckpt"), "--dataset", f.t.path("ls.tsv"),
             "--k", "3", "--out", f.t.path("pipe.tsv")});
    REQUIRE(pipe.code == 0);
    const std::vector<LsOutput> pipe_rows = read_ls_outputs(f.t.path("pipe.tsv"));
    REQUIRE(pipe_rows.size() == 4);
    const json pipe_scores = json::parse(read_file(f.t.path("pipe.tsv.scores.json")));
    CHECK(pipe_scores.contains("precision"));
    CHECK(pipe_scores.contains("accuracy"));
}

TEST_CASE("score --task ls reproduces hand-computed metrics") {
    TempDir t;
    write_file(t.path("gold.tsv"),
               "the mansion was big\t1\tmansion\thouse\thome\n"
               "a rapid stream\t1\trapid\tfast\tquick\n"
               "the irate man\t1\tirate\tangry\n");
    // row 1: candidates hit {house}, chosen house (in gold, != target)
    // row 2: candidates hit {fast,quick}, no substitution made
    // row 3: candidates miss, chosen wrong word
    write_file(t.path("sys.tsv"),
               "mansion\thouse\thouse,castle\n"
               "rapid\t\tfast,quick\n"
               "irate\tmad\tmad\n");
    const RunResult r = run({"score", "--task", "ls", "--dataset", t.path("gold.tsv"),
                             "--ls-outputs", t.path("sys.tsv"), "--out", t.path("s.json")});
    REQUIRE(r.code == 0);
    const json s = json::parse(read_file(t.path("s.json")));
    // sg: matched 1+2+0 of 2+2+1 candidates, gold sizes 2+2+1
    CHECK(s["sg"]["precision"].get<double>() == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
    CHECK(s["sg"]["recall"].get<double>() == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
    // pipeline: changed rows 1 and 3, correct {1}; accuracy counts row 1 of 3
    CHECK(s["pipeline"]["precision"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s["pipeline"]["accuracy"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // target mismatch against the dataset is a data error
    write_file(t.path("wrong.tsv"),
               "palace\thouse\thouse\n"
               "rapid\trapid\tfast\n"
               "irate\tmad\tmad\n");
    const RunResult bad = run({"score", "--task", "ls", "--dataset", t.path("gold.tsv"),
                               "--ls-outputs", t.path("wrong.tsv"), "--out", t.path("s2.json")});
    CHECK(bad.code == 3);
}

TEST_CASE("score --task ss matches the metric functions directly") {
    TempDir t;
    write_file(t.path("src.txt"), "the cat sat on the mat .\nthe dog barked at the mailman .\n");
    write_file(t.path("ref.txt"), "the cat sat on a mat .\nthe dog barked loudly .\n");
    write_file(t.path("out.txt"), "the cat sat on a mat .\nthe dog barked at him .\n");
    const RunResult r = run({"score", "--task", "ss", "--src", t.path("src.txt"), "--outputs",
                             t.path("out.txt"), "--refs", t.path("ref.txt"), "--out",
                             t.path("ss.json")});
    REQUIRE(r.code == 0);
    const json s = json::parse(read_file(t.path("ss.json")));

    const auto tok = [](const std::string& line) { return tokenize(line); };
    const std::vector<std::vector<std::string>> sources = {tok("the cat sat on the mat ."),
                                                           tok("the dog barked at the mailman .")};
    const std::vector<std::vector<std::string>> outputs = {tok("the cat sat on a mat ."),
                                                           tok("the dog barked at him .")};
    const std::vector<std::vector<std::vector<std::string>>> refs = {
        {tok("the cat sat on a mat .")}, {tok("the dog barked loudly .")}};
    CHECK(s["sari"]["total"].get<double>() ==
          doctest::Approx(sari(sources, outputs, refs).total).epsilon(1e-12));
    CHECK(s["fkgl"].get<double>() == doctest::Approx(fkgl(outputs)).epsilon(1e-12));

    // identity outputs score the pinned identity SARI
    const RunResult ident = run({"score", "--task", "ss", "--src", t.path("src.txt"), "--outputs",
                                 t.path("src.txt"), "--refs", t.path("src.txt"), "--out",
                                 t.path("id.json")});
    REQUIRE(ident.code == 0);
    const json id = json::parse(read_file(t.path("id.json")));
    CHECK(id["sari"]["total"].get<double>() == doctest::Approx(200.0 / 3.0).epsilon(1e-12));

    // misaligned output file is a data error
    write_file(t.path("short.txt"), "one line only .\n");
    CHECK(run({"score", "--task", "ss", "--src", t.path("src.txt"), "--outputs",
               t.path("short.txt"), "--refs", t.path("ref.txt"), "--out", t.path("x.json")})
              .code == 3);
}

TEST_CASE("eval-ss fine-tunes, decodes aligned output, and saves a model") {
    PretrainFixture f;
    REQUIRE(run(f.pretrain_args).code == 0);

    const auto corpus = load_corpus(f.t.path("c.txt"), CorpusFormat::PlainLines);
    std::ostringstream train, eval;
    for (int i = 0; i < 20; ++i) train << join_tokens(corpus[i].tokens) << '\n';
    for (int i = 0; i < 5; ++i) eval << join_tokens(corpus[i].tokens) << '\n';
    write_file(f.t.path("train.txt"), train.str());
    write_file(f.t.path("eval.txt"), eval.str());

    const RunResult r = run({"eval-ss",       "--checkpoint", f.t.path("m.ckpt"),
                             "--train-src",   f.t.path("train.txt"),
                             "--train-ref",   f.t.path("train.txt"),
                             "--eval-src",    f.t.path("eval.txt"),
                             "--eval-refs",   f.t.path("eval.txt"),
                             "--epochs",      "2",
                             "--batch-size",  "4",
                             "--beam",        "2",
                             "--decode-max",  "12",
                             "--model-out",   f.t.path("s2s.ckpt"),
                             "--out",         f.t.path("decoded.txt"),
                             "--seed",        "5"});
    REQUIRE(r.code == 0);
    CHECK(count_lines(f.t.path("decoded.txt")) == 5);
    const json s = json::parse(read_file(f.t.path("decoded.txt.scores.json")));
    CHECK(s.contains("sari"));
    CHECK(s.contains("fkgl"));
    const Seq2SeqParams model = load_seq2seq_checkpoint(f.t.path("s2s.ckpt"));
    CHECK(model.encoder_config.d_model == 16);
}

TEST_CASE("ablate emits the four-variant table with a zero baseline delta") {
    TempDir t;
    const RunResult r = run({"ablate", "--sentences", "60", "--eval-sentences", "40", "--epochs",
                             "1", "--out", t.path("report.txt"), "--ckpt-dir", t.path("ckpts"),
                             "--seed", "3"});
    REQUIRE(r.code == 0);
    const std::string report = read_file(t.path("report.txt"));
    CHECK(report.find("baseline") != std::string::npos);
    CHECK(report.find("corpus-only") != std::string::npos);
    CHECK(report.find("mechanism-only") != std::string::npos);
    CHECK(report.find("both") != std::string::npos);
    CHECK(report.find("+0.000000") != std::string::npos);
    CHECK(report.find("probe slots:") != std::string::npos);
    for (const char* name : {"baseline", "corpus-only", "mechanism-only", "both"})
        CHECK(fs::exists(t.path("ckpts") + "/" + std::string(name) + ".ckpt"));
    // four data rows under the header
    CHECK(count_lines(t.path("report.txt")) >= 6);
}
