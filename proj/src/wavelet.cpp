// Copyright (c) the chartseal authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chartseal/wavelet.hpp"

#include "chartseal/errors.hpp"

namespace chartseal {

SubbandSet dwt(const ImageTensor& img) {
  if (img.height % 2 != 0 || img.width % 2 != 0) {
    throw ShapeError("dwt needs even height and width, got " + std::to_string(img.height) + "x" +
                     std::to_string(img.width));
  }
  const int h = img.height / 2, w = img.width / 2, nc = img.channels;
  SubbandSet sb{Tensor(nc, h, w), Tensor(nc, h, w), Tensor(nc, h, w), Tensor(nc, h, w),
                img.height, img.width};
  for (int c = 0; c < nc; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double a = img.at(2 * y, 2 * x, c);
        const double b = img.at(2 * y, 2 * x + 1, c);
        const double cc = img.at(2 * y + 1, 2 * x, c);
        const double d = img.at(2 * y + 1, 2 * x + 1, c);
        sb.ll.at(c, y, x) = 0.5 * (a + b + cc + d);
        sb.lh.at(c, y, x) = 0.5 * (a - b + cc - d);
        sb.hl.at(c, y, x) = 0.5 * (a + b - cc - d);
        sb.hh.at(c, y, x) = 0.5 * (a - b - cc + d);
      }
    }
  }
  return sb;
}

ImageTensor idwt(const SubbandSet& sb) {
  if (!sb.ll.same_shape(sb.lh) || !sb.ll.same_shape(sb.hl) || !sb.ll.same_shape(sb.hh)) {
    throw ShapeError("idwt subbands differ in shape");
  }
  if (sb.source_height != 2 * sb.ll.h || sb.source_width != 2 * sb.ll.w) {
    throw ShapeError("idwt source size does not match subband size");
  }
  ImageTensor img(sb.source_height, sb.source_width, sb.ll.c);
  for (int c = 0; c < sb.ll.c; ++c) {
    for (int y = 0; y < sb.ll.h; ++y) {
      for (int x = 0; x < sb.ll.w; ++x) {
        const double ll = sb.ll.at(c, y, x), lh = sb.lh.at(c, y, x);
        const double hl = sb.hl.at(c, y, x), hh = sb.hh.at(c, y, x);
        img.at(2 * y, 2 * x, c) = 0.5 * (ll + lh + hl + hh);
        img.at(2 * y, 2 * x + 1, c) = 0.5 * (ll - lh + hl - hh);
        img.at(2 * y + 1, 2 * x, c) = 0.5 * (ll + lh - hl - hh);
        img.at(2 * y + 1, 2 * x + 1, c) = 0.5 * (ll - lh - hl + hh);
      }
    }
  }
  return img;
}

Tensor pack_subbands(const SubbandSet& sb) {
  const int nc = sb.ll.c;
  Tensor out(4 * nc, sb.ll.h, sb.ll.w);
  const Tensor* bands[4] = {&sb.ll, &sb.lh, &sb.hl, &sb.hh};
  for (int b = 0; b < 4; ++b) {
    std::copy(bands[b]->v.begin(), bands[b]->v.end(), out.channel(b * nc));
  }
  return out;
}

SubbandSet unpack_subbands(const Tensor& stream, int image_channels) {
  if (stream.c != 4 * image_channels) throw ShapeError("stream channel count is not 4*C");
  SubbandSet sb;
  Tensor* bands[4] = {&sb.ll, &sb.lh, &sb.hl, &sb.hh};
  for (int b = 0; b < 4; ++b) {
    *bands[b] = Tensor(image_channels, stream.h, stream.w);
    const double* src = stream.channel(b * image_channels);
    std::copy(src, src + bands[b]->size(), bands[b]->v.begin());
  }
  sb.source_height = 2 * stream.h;
  sb.source_width = 2 * stream.w;
  return sb;
}

Tensor haar_forward(const ImageTensor& img) { return pack_subbands(dwt(img)); }

ImageTensor haar_inverse(const Tensor& stream) {
  if (stream.c % 4 != 0) throw ShapeError("stream channel count is not a multiple of 4");
  return idwt(unpack_subbands(stream, stream.c / 4));
}

}  // namespace chartseal
