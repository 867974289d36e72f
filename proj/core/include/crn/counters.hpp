#ifndef CRN_COUNTERS_HPP
#define CRN_COUNTERS_HPP

#include <cstdint>

namespace crn {

/// Arithmetic cost tally for one estimation call. Only full complex*complex
/// products count as complex_mults; real-by-complex scalings and sign flips
/// do not.
struct MultCounter {
    std::uint64_t complex_mults = 0;
    std::uint64_t complex_adds = 0;

    MultCounter& operator+=(const MultCounter& other) {
        complex_mults += other.complex_mults;
        complex_adds += other.complex_adds;
        return *this;
    }
    void reset() { complex_mults = 0; complex_adds = 0; }
};

} // namespace crn

#endif
