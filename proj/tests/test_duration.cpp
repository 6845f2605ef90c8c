#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <thread>

#include "sqtts/duration.hpp"

#include <httplib.h>

using namespace sqtts;

TEST_CASE("duration from waveform length") {
  const auto one = duration_from_waveform(Waveform::Zero(16000), 16000);
  CHECK(one.seconds == 1.0);
  CHECK(one.source == DurationSource::waveform);
  CHECK(duration_from_waveform(Waveform::Zero(8000), 16000).seconds == 0.5);
  CHECK_THROWS_AS(duration_from_waveform(Waveform(), 16000), std::invalid_argument);
}

TEST_CASE("heuristic estimate with clamping") {
  const auto est = estimate_duration_heuristic("one two three four five six seven eight nine ten", 2.5);
  CHECK(est.seconds == doctest::Approx(4.0));
  CHECK(est.source == DurationSource::heuristic);

  // 1 word at 2.5 wps = 0.4 s, clamped up to the 0.5 s floor
  CHECK(estimate_duration_heuristic("hi", 2.5).seconds == 0.5);
  CHECK(estimate_duration_heuristic(std::string(200, 'a') + " word", 0.01, 30.0).seconds == 30.0);

  CHECK_THROWS_AS(estimate_duration_heuristic("", 2.5), std::invalid_argument);
  CHECK_THROWS_AS(estimate_duration_heuristic("   ", 2.5), std::invalid_argument);
  CHECK_THROWS_AS(estimate_duration_heuristic("words", 0.0), std::invalid_argument);
}

TEST_CASE("word counting") {
  CHECK(count_words("hello") == 1);
  CHECK(count_words("a b  c\td\ne") == 5);
  CHECK(count_words("  leading and trailing  ") == 3);
  CHECK(count_words("") == 0);
}

TEST_CASE("seconds parsing") {
  CHECK(parse_seconds("4.2") == 4.2);
  CHECK(parse_seconds("about 3 seconds") == 3.0);
  CHECK(parse_seconds("{\"seconds\": 2.75}") == 2.75);
  CHECK(parse_seconds("-3") == -3.0);
  CHECK_FALSE(parse_seconds("no numbers here").has_value());
}

TEST_CASE("llm client parse, validation and fallback paths") {
  LlmClientConfig cfg;
  cfg.fallback_words_per_second = 2.5;

  const std::string text = "one two three four five six seven eight nine ten";
  const auto heuristic = estimate_duration_heuristic(text, 2.5);

  {
    LlmDurationClient ok(cfg, [](const std::string&, const std::string&) {
      return std::optional<std::string>("4.2");
    });
    const auto est = ok.estimate(text);
    CHECK(est.seconds == 4.2);
    CHECK(est.source == DurationSource::llm);
    CHECK(ok.fallback_count() == 0);
  }
  {
    LlmDurationClient garbage(cfg, [](const std::string&, const std::string&) {
      return std::optional<std::string>("no idea, sorry");
    });
    const auto est = garbage.estimate(text);
    CHECK(est.source == DurationSource::heuristic);
    CHECK(est.seconds == heuristic.seconds);
    CHECK(garbage.fallback_count() == 1);
  }
  {
    LlmDurationClient negative(cfg, [](const std::string&, const std::string&) {
      return std::optional<std::string>("-3");
    });
    CHECK(negative.estimate(text).source == DurationSource::heuristic);
  }
  {
    LlmDurationClient out_of_range(cfg, [](const std::string&, const std::string&) {
      return std::optional<std::string>("5000");
    });
    CHECK(out_of_range.estimate(text).source == DurationSource::heuristic);
  }
  {
    LlmDurationClient down(cfg, [](const std::string&, const std::string&) {
      return std::optional<std::string>();
    });
    CHECK(down.estimate(text).source == DurationSource::heuristic);
  }
  {
    LlmDurationClient no_transport(cfg);
    CHECK(no_transport.estimate(text).source == DurationSource::heuristic);
    CHECK_THROWS_AS(no_transport.estimate(""), std::invalid_argument);
  }
}

TEST_CASE("llm responses are cached by (prompt, text)") {
  const std::string cache_path = "test_duration_cache.json";
  std::remove(cache_path.c_str());
  LlmClientConfig cfg;
  cfg.cache_path = cache_path;

  int calls = 0;
  auto transport = [&calls](const std::string&, const std::string&) {
    ++calls;
    return std::optional<std::string>("2.5");
  };
  {
    LlmDurationClient client(cfg, transport);
    CHECK(client.estimate("some words here").seconds == 2.5);
    CHECK(client.estimate("some words here").seconds == 2.5);
    CHECK(calls == 1);  // second hit served from cache
  }
  {
    LlmDurationClient client(cfg, transport);  // fresh client, same cache file
    CHECK(client.estimate("some words here").seconds == 2.5);
    CHECK(calls == 1);
    CHECK(client.estimate("different words").seconds == 2.5);
    CHECK(calls == 2);
  }
  std::remove(cache_path.c_str());
}

TEST_CASE("http transport against a local endpoint") {
  httplib::Server server;
  std::atomic<bool> got_auth{false};
  server.Post("/estimate", [&](const httplib::Request& req, httplib::Response& res) {
    if (req.has_header("Authorization")) got_auth = true;
    res.set_content("3.5", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  LlmClientConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/estimate";
  cfg.timeout_seconds = 5.0;
  LlmDurationClient client(cfg);
  const auto est = client.estimate("hello over http");
  CHECK(est.seconds == 3.5);
  CHECK(est.source == DurationSource::llm);

  server.stop();
  server_thread.join();
}
