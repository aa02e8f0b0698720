// Minimal end-to-end example: compare LS, LMMSE and the genie reference on
// the EPA channel and print the metric CSV to stdout.

#include <iostream>

#include "ofdmce/ofdmce.hpp"

int main() {
    using namespace ofdmce;

    grid::PhyConfig phy;  // 72 x 14 frame, comb pilots on symbols 0 and 6

    // Second-order channel statistics for the LMMSE estimator, learned from
    // one thousand fresh fading realizations at 97 Hz Doppler.
    const auto stats = bench::learn_lmmse_statistics(channel::epa_profile(), 97.0, 1000, 5, phy);

    bench::RunConfig rc;
    rc.profile = channel::epa_profile();
    rc.doppler_hz = 97.0;
    rc.snr_grid = {0.0, 10.0, 20.0};
    rc.n_frames = 200;
    rc.seed = 1;

    const auto records = bench::run_link(rc, std::vector<bench::Estimator>{
                                                 bench::make_ls_estimator(phy),
                                                 bench::make_lmmse_estimator(stats, phy),
                                                 bench::make_perfect_estimator(),
                                             });
    std::cout << bench::metrics_csv(records);
    return 0;
}
