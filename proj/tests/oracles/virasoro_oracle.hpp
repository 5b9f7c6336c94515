#pragma once

// Independent oracle for Virasoro Verma inner products. A state is a word of
// modes applied to the highest-weight vector; <Omega, w Omega> is reduced by
// moving raising operators right with [L_a, L_b] = (a-b)L_{a+b} + c(a^3-a)/12
// delta_{a+b,0}. No code is shared with the library's reduction engine.

#include <map>
#include <vector>

#include <gmpxx.h>

namespace oracle {

class VirasoroVacuum {
 public:
  VirasoroVacuum(mpq_class c, mpq_class h) : c_(std::move(c)), h_(std::move(h)) {}

  /// <Omega, L_{w[0]} ... L_{w[k-1]} Omega>.
  mpq_class expect(const std::vector<int>& w) {
    if (w.empty()) return 1;
    auto it = memo_.find(w);
    if (it != memo_.end()) return it->second;
    mpq_class r = reduce(w);
    memo_.emplace(w, r);
    return r;
  }

  /// <L_{-a_1} ... L_{-a_r} Omega, L_{-b_1} ... L_{-b_s} Omega> for positive a, b.
  mpq_class inner(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> w;
    for (auto it = a.rbegin(); it != a.rend(); ++it) w.push_back(*it);  // adjoint flips order and sign
    for (int x : b) w.push_back(-x);
    return expect(w);
  }

 private:
  mpq_class reduce(const std::vector<int>& w) {
    const size_t k = w.size();
    if (w.back() > 0) return 0;   // annihilates Omega
    if (w.front() < 0) return 0;  // adjoint annihilates Omega on the left
    if (w.back() == 0) return h_ * expect({w.begin(), w.end() - 1});
    if (w.front() == 0) return h_ * expect({w.begin() + 1, w.end()});
    // Find a raising operator followed by a lowering one and swap them.
    for (size_t i = 0; i + 1 < k; ++i) {
      const int a = w[i], b = w[i + 1];
      if (a > 0 && b <= 0) {
        std::vector<int> swapped = w;
        std::swap(swapped[i], swapped[i + 1]);
        mpq_class r = expect(swapped);
        std::vector<int> merged(w.begin(), w.begin() + static_cast<long>(i));
        merged.push_back(a + b);
        merged.insert(merged.end(), w.begin() + static_cast<long>(i) + 2, w.end());
        r += mpq_class(a - b) * expect(merged);
        if (a + b == 0) {
          std::vector<int> rest(w.begin(), w.begin() + static_cast<long>(i));
          rest.insert(rest.end(), w.begin() + static_cast<long>(i) + 2, w.end());
          mpq_class weight(static_cast<long>(a) * a * a - a, 12);
          weight.canonicalize();
          mpq_class central = c_ * weight;
          r += central * expect(rest);
        }
        return r;
      }
    }
    return 0;  // unreachable: front > 0 and back < 0 force a swap position
  }

  mpq_class c_, h_;
  std::map<std::vector<int>, mpq_class> memo_;
};

}  // namespace oracle
