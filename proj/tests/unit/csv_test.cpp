#include "sigspline/csv.hpp"

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "sigspline/errors.hpp"
#include "test_helpers.hpp"

namespace sigspline {
namespace {

using testing::random_sequence;

TEST(SeriesCsv, HeaderAndExactRoundTrip) {
  Rng rng(91);
  const Sequence x = random_sequence(rng, 5, 3, -1e6, 1e6);
  std::ostringstream out;
  write_series_csv(out, x);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "t,ch1,ch2,ch3");
  std::istringstream in(out.str());
  EXPECT_EQ(read_series_csv(in), x);
}

TEST(SeriesCsv, RejectsMalformedInput) {
  std::istringstream bad_header("x,y\n0,1\n");
  EXPECT_THROW(read_series_csv(bad_header), DataError);
  std::istringstream ragged("t,ch1,ch2\n0,1,2\n1,3\n");
  EXPECT_THROW(read_series_csv(ragged), DataError);
  std::istringstream text("t,ch1\n0,abc\n");
  EXPECT_THROW(read_series_csv(text), DataError);
  std::istringstream empty("t,ch1\n");
  EXPECT_THROW(read_series_csv(empty), DataError);
  EXPECT_THROW(read_series_csv(std::string("/nonexistent/file.csv")), DataError);
}

TEST(BatchCsv, RoundTrip) {
  Rng rng(92);
  const std::vector<Sequence> batch{random_sequence(rng, 4, 2), random_sequence(rng, 4, 2),
                                    random_sequence(rng, 4, 2)};
  const auto path = std::filesystem::temp_directory_path() / "sigspline_batch_test.csv";
  write_batch_csv(path.string(), batch);
  const auto back = read_batch_csv(path.string());
  ASSERT_EQ(back.size(), batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) EXPECT_EQ(back[j], batch[j]);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace sigspline
