#include <doctest.h>

#include <fstream>
#include <random>

#include "adgen/error.hpp"
#include "adgen/image_io.hpp"
#include "adgen/ingest.hpp"
#include "fixture.hpp"

using namespace adgen;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string embedding_json(int n, float value = 0.1f) {
  std::string out = "[";
  for (int i = 0; i < n; ++i) out += (i ? "," : "") + std::to_string(value);
  return out + "]";
}

}  // namespace

TEST_CASE("load_frames returns frames in ascending index order") {
  const auto dir = testing::scratch_dir("frames_order");
  for (int i = 9; i >= 0; --i) {
    char name[16];
    std::snprintf(name, sizeof name, "%03d.png", i);
    write_png(dir / name, FrameBuffer(8, 6, Rgb{static_cast<std::uint8_t>(i * 10), 0, 0}));
  }
  write(dir / "notes.txt", "ignored");
  const auto frames = load_frames(dir);
  REQUIRE(frames.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(frames[i].at(0, 0).r == i * 10);
}

TEST_CASE("load_frames rejects empty and mixed-size directories") {
  const auto dir = testing::scratch_dir("frames_bad");
  CHECK_THROWS_WITH_AS(load_frames(dir), doctest::Contains("no frames"), InputError);
  write_png(dir / "000.png", FrameBuffer(64, 64));
  write_png(dir / "001.png", FrameBuffer(32, 32));
  CHECK_THROWS_WITH_AS(load_frames(dir), doctest::Contains("mixed dimensions"), InputError);
}

TEST_CASE("parse_srt converts timestamps exactly") {
  const auto subs = parse_srt("1\n00:00:01,000 --> 00:00:02,500\nHello\n");
  REQUIRE(subs.size() == 1);
  CHECK(subs[0] == Subtitle{1, 1.0, 2.5, "Hello"});
  CHECK(parse_srt("").empty());

  const auto joined = parse_srt("7\n01:02:03,004 --> 01:02:04,000\nHello\nthere\n");
  REQUIRE(joined.size() == 1);
  CHECK(joined[0].text == "Hello there");
  CHECK(joined[0].start_s == 3723004 / 1000.0);
}

TEST_CASE("parse_srt tolerates CRLF and a BOM and sorts by start") {
  const auto subs = parse_srt("\xEF\xBB\xBF" "2\r\n00:00:05,000 --> 00:00:06,000\r\nLater\r\n\r\n"
                              "1\r\n00:00:01,000 --> 00:00:02,000\r\nEarlier\r\n");
  REQUIRE(subs.size() == 2);
  CHECK(subs[0].text == "Earlier");
  CHECK(subs[1].text == "Later");
}

TEST_CASE("parse_srt reports malformed timestamps with a line number") {
  CHECK_THROWS_WITH_AS(parse_srt("1\n00:00:01 -> 00:00:02\nx\n"), doctest::Contains("line 2"), InputError);
}

TEST_CASE("parse_srt inverts format_srt on random subtitles") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> ms(0, 5 * 3600 * 1000);
  std::uniform_int_distribution<int> len(1, 20000);
  const std::vector<std::string> words = {"Hello", "there", "Amy", "what's", "going", "on?", "No."};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Subtitle> subs;
    for (int i = 0; i < 12; ++i) {
      Subtitle s;
      s.index = i + 1;
      const int start = ms(rng);
      s.start_s = start / 1000.0;
      s.end_s = (start + len(rng)) / 1000.0;
      s.text = words[rng() % words.size()] + " " + words[rng() % words.size()];
      subs.push_back(s);
    }
    std::stable_sort(subs.begin(), subs.end(), [](auto& a, auto& b) { return a.start_s < b.start_s; });
    CHECK(parse_srt(format_srt(subs)) == subs);
  }
}

TEST_CASE("load_cast validates entries") {
  const auto dir = testing::scratch_dir("cast");
  write(dir / "ok.json", R"([{"cast_id":"a","actor_name":"X","character_name":"Amy Dunne","profile_image":"a.png"},
                             {"cast_id":"b","actor_name":"Y","character_name":"Nick Dunne","profile_image":"b.png"},
                             {"cast_id":"c","actor_name":"Z","character_name":"Margo","profile_image":"c.png"}])");
  const auto cast = load_cast(dir / "ok.json");
  REQUIRE(cast.size() == 3);
  CHECK(cast[0].character_name == "Amy Dunne");
  CHECK(cast[2].profile_image == fs::path("c.png"));

  write(dir / "dup.json", R"([{"cast_id":"a","character_name":"A"},{"cast_id":"a","character_name":"B"}])");
  CHECK_THROWS_WITH_AS(load_cast(dir / "dup.json"), doctest::Contains("duplicate cast_id"), InputError);
}

TEST_CASE("parse_detections checks embedding length and clip ids") {
  const std::string good = R"({"clip_id":"c1","frame_idx":0,"person_box":[0,0,10,10],"confidence":0.9,"face_embedding":)" +
                           embedding_json(512) + "}\n";
  const auto parsed = parse_detections(good);
  REQUIRE(parsed.at("c1").size() == 1);
  CHECK(parsed.at("c1")[0].face_embedding->size() == 512);

  const std::string short_emb = R"({"clip_id":"c1","frame_idx":0,"person_box":[0,0,10,10],"confidence":0.9,"face_embedding":)" +
                                embedding_json(511) + "}\n";
  CHECK_THROWS_WITH_AS(parse_detections(short_emb), doctest::Contains("512"), InputError);

  const std::set<std::string> known{"c2"};
  CHECK_THROWS_WITH_AS(parse_detections(good, &known), doctest::Contains("unknown clip_id"), InputError);
  CHECK_THROWS_AS(parse_detections(R"({"clip_id":"c1","frame_idx":0,"person_box":[5,0,1,10],"confidence":0.9})"),
                  InputError);
  CHECK_THROWS_AS(parse_detections(R"({"clip_id":"c1","frame_idx":-1,"person_box":[0,0,1,1],"confidence":0.9})"),
                  InputError);
}

TEST_CASE("parse_detections grouping preserves the record multiset") {
  std::mt19937 rng(3);
  std::string text;
  std::multiset<std::tuple<std::string, int, double>> expected;
  for (int i = 0; i < 200; ++i) {
    const auto clip = "clip" + std::to_string(rng() % 5);
    const int frame = static_cast<int>(rng() % 40);
    const double x = static_cast<double>(rng() % 100);
    expected.insert({clip, frame, x});
    text += R"({"clip_id":")" + clip + R"(","frame_idx":)" + std::to_string(frame) + R"(,"person_box":[)" +
            std::to_string(x) + ",0," + std::to_string(x + 5) + R"(,5],"confidence":0.5})" + "\n";
  }
  std::multiset<std::tuple<std::string, int, double>> got;
  for (const auto& [clip, recs] : parse_detections(text)) {
    for (const auto& r : recs) got.insert({clip, r.frame_idx, r.person_box.x1});
  }
  CHECK(got == expected);
}

TEST_CASE("clamp_detections clips boxes to the frame") {
  DetectionRecord inside{0, {-5, -5, 20, 20}, 0.9, BoundingBox{45, 45, 60, 60}, std::nullopt};
  DetectionRecord outside{0, {200, 0, 220, 10}, 0.9, std::nullopt, std::nullopt};
  const auto out = clamp_detections({inside, outside}, 40, 40);
  REQUIRE(out.size() == 1);
  CHECK(out[0].person_box.x1 == 0.0);
  CHECK(out[0].person_box.y1 == 0.0);
  CHECK_FALSE(out[0].face_box.has_value());
}

TEST_CASE("load_ground_truth counts words and load_clips resolves frame dirs") {
  const auto dir = testing::scratch_dir("gt");
  write(dir / "gt.jsonl", R"({"clip_id":"c1","start_s":1.5,"end_s":3,"text":"Amy opens the door."})" "\n");
  const auto gt = load_ground_truth(dir / "gt.jsonl");
  REQUIRE(gt.size() == 1);
  CHECK(gt[0].word_count == 4);

  write(dir / "clips.jsonl", R"({"clip_id":"c1","start_s":0,"end_s":4})" "\n"
                             R"({"clip_id":"c2","start_s":4,"end_s":8,"frame_dir":"elsewhere"})" "\n");
  const auto clips = load_clips(dir / "clips.jsonl", dir / "frames");
  REQUIRE(clips.size() == 2);
  CHECK(clips[0].frame_dir == dir / "frames" / "c1");
  CHECK(clips[1].frame_dir == dir / "frames" / "elsewhere");
}

TEST_CASE("count_words splits on whitespace") {
  CHECK(count_words("") == 0);
  CHECK(count_words("  one\ttwo\nthree  ") == 3);
}

TEST_CASE("PNG and PPM images decode to the written pixels") {
  const auto dir = testing::scratch_dir("images");
  FrameBuffer f(5, 3, Rgb{1, 2, 3});
  f.set(4, 2, Rgb{200, 100, 50});
  write_png(dir / "a.png", f);
  const auto back = read_image(dir / "a.png");
  CHECK(back.pixels == f.pixels);

  std::string ppm = "P6\n# comment\n2 1\n255\n";
  ppm += std::string("\x0a\x14\x1e\xff\x00\x7f", 6);
  write(dir / "b.ppm", ppm);
  const auto p = read_image(dir / "b.ppm");
  CHECK(p.width == 2);
  CHECK(p.at(1, 0).b == 0x7f);
  write(dir / "c.png", "not a png");
  CHECK_THROWS_AS(read_image(dir / "c.png"), InputError);
}
