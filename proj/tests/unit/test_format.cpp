/* Copyright 2026 The CPDM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <string>

#include "cpdm/csv.hpp"
#include "cpdm/error.hpp"
#include "cpdm/format.hpp"
#include "cpdm/image_io.hpp"
#include "cpdm/tensor.hpp"

namespace cpdm {
namespace {

TEST(Format, FixedSixDecimals) {
  EXPECT_EQ(fixed6(99.958350687), "99.958351");
  EXPECT_EQ(fixed6(0.0), "0.000000");
  EXPECT_EQ(fixed6(-1e-12), "0.000000");
  EXPECT_EQ(fixed6(-0.0412328), "-0.041233");
  EXPECT_EQ(fixed(1.25, 1), "1.2");
}

TEST(Format, SignificantDigits) {
  EXPECT_EQ(significant(0.1, 9), "0.1");
  EXPECT_EQ(significant(1.0 / 3.0, 9), "0.333333333");
  EXPECT_EQ(parse_double(significant(1e-20 / 3.0, 17)), 1e-20 / 3.0);
}

TEST(Format, ParseDoubleIsStrict) {
  EXPECT_EQ(parse_double("2.5"), 2.5);
  EXPECT_EQ(parse_double("-1e3"), -1000.0);
  EXPECT_THROW(parse_double(""), FormatError);
  EXPECT_THROW(parse_double("1.0x"), FormatError);
  EXPECT_THROW(parse_double("abc"), FormatError);
  EXPECT_THROW(parse_double("nan"), FormatError);
}

TEST(Format, JsonQuoteEscapes) {
  EXPECT_EQ(json_quote("a\"b\\c\n"), "\"a\\\"b\\\\c\\n\"");
}

TEST(Csv, QuotedFieldsAndBlankLines) {
  const auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\n\n1,2,3\r\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "b,c");
  EXPECT_EQ(rows[0][2], "d\"e");
  EXPECT_EQ(rows[1][2], "3");
}

TEST(Csv, FieldQuotingRoundTrips) {
  for (const std::string s : {"plain", "with,comma", "with\"quote", "line\nbreak"}) {
    const auto rows = parse_csv(csv_field(s) + "\n");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0][0], s);
  }
  EXPECT_EQ(csv_field("plain"), "plain");
}

TEST(ImageIo, PpmRoundTrip) {
  Tensor img({3, 2, 2});
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>(i) / 11.0f;
  const Tensor back = read_ppm(write_ppm(img));
  ASSERT_EQ(back.shape(), img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back[i], img[i], 0.5 / 255.0 + 1e-6);
}

TEST(ImageIo, PpmHeaderWithComment) {
  const std::string bytes = std::string("P6\n# hi\n1 1\n255\n") + '\xff' + '\0' + '\x80';
  const Tensor t = read_ppm(bytes);
  ASSERT_EQ(t.shape(), (std::vector<std::size_t>{3, 1, 1}));
  EXPECT_FLOAT_EQ(t[0], 1.0f);
  EXPECT_FLOAT_EQ(t[1], 0.0f);
  EXPECT_NEAR(t[2], 128.0 / 255.0, 1e-6);
}

TEST(ImageIo, PpmErrors) {
  EXPECT_THROW(read_ppm("P5\n1 1\n255\n\x01"), FormatError);
  EXPECT_THROW(read_ppm("P6\n2 2\n255\nabc"), FormatError);
  EXPECT_THROW(read_ppm("P6\n0 2\n255\n"), FormatError);
}

TEST(ImageIo, PgmLayout) {
  const std::string pgm = write_pgm(2, 1, {0, 255}, "demo");
  EXPECT_EQ(pgm, std::string("P5\n# demo\n2 1\n255\n") + '\0' + '\xff');
}

}  // namespace
}  // namespace cpdm
