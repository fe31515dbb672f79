// Copyright 2026 The rfimdi Authors
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

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

namespace rfimdi::fock {

using Complex = std::complex<double>;

/// Occupation-number basis of `Modes` bosonic modes truncated at
/// `MaxPhotons` total photons. For 4 modes and 2 photons the dimension is 15.
template <std::size_t Modes, int MaxPhotons>
class TruncatedSpace {
   public:
    using Occupation = std::array<int, Modes>;
    using Mat = std::array<std::array<Complex, Modes>, Modes>;

    TruncatedSpace() {
        Occupation occ{};
        enumerate(0, MaxPhotons, occ);
        for (std::size_t i = 0; i < basis_.size(); ++i) index_[basis_[i]] = i;
    }

    std::size_t dim() const { return basis_.size(); }
    const Occupation &state(std::size_t i) const { return basis_[i]; }
    std::size_t index(const Occupation &occ) const {
        auto it = index_.find(occ);
        if (it == index_.end()) throw std::out_of_range("occupation outside truncated space");
        return it->second;
    }

    /// Matrix of the passive linear-optics map induced on the Fock space by
    /// the single-photon mode transformation a_j^dag -> sum_i u[i][j] a_i^dag.
    std::vector<std::vector<Complex>> induced_unitary(const Mat &u) const {
        const std::size_t d = dim();
        std::vector<std::vector<Complex>> out(d, std::vector<Complex>(d, Complex{}));
        for (std::size_t col = 0; col < d; ++col) {
            const Occupation &in = basis_[col];
            // Expand prod_j (sum_i u_ij a_i^dag)^{n_j} / sqrt(n_j!) |0>.
            std::map<Occupation, Complex> poly{{Occupation{}, Complex{1.0}}};
            double norm = 1;
            for (std::size_t j = 0; j < Modes; ++j) {
                for (int c = 0; c < in[j]; ++c) {
                    std::map<Occupation, Complex> next;
                    for (const auto &[mono, coef] : poly) {
                        for (std::size_t i = 0; i < Modes; ++i) {
                            if (u[i][j] == Complex{}) continue;
                            Occupation m = mono;
                            ++m[i];
                            next[m] += coef * u[i][j];
                        }
                    }
                    poly.swap(next);
                }
                norm *= std::tgamma(in[j] + 1.0);
            }
            for (const auto &[mono, coef] : poly) {
                // prod a_i^dag^{m_i} |0> = prod sqrt(m_i!) |m>.
                double f = 1;
                for (int m : mono) f *= std::sqrt(std::tgamma(m + 1.0));
                out[index(mono)][col] += coef * f / std::sqrt(norm);
            }
        }
        return out;
    }

    static std::vector<Complex> apply(const std::vector<std::vector<Complex>> &m, const std::vector<Complex> &v) {
        std::vector<Complex> out(v.size(), Complex{});
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
        }
        return out;
    }

   private:
    void enumerate(std::size_t mode, int left, Occupation &occ) {
        if (mode == Modes) {
            basis_.push_back(occ);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            occ[mode] = k;
            enumerate(mode + 1, left - k, occ);
        }
        occ[mode] = 0;
    }

    std::vector<Occupation> basis_;
    std::map<Occupation, std::size_t> index_;
};

}  // namespace rfimdi::fock
