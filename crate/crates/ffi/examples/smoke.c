#include <stdio.h>
#include <math.h>
#include "compacta.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        enum CompactaStatus st_ = (call);                                  \
        if (st_ != COMPACTA_STATUS_OK) {                                   \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)st_,       \
                    compacta_last_error());                                \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    double samples[1000];
    for (int i = 0; i < 1000; i++) samples[i] = (double)i;

    CompactaSignal *sig = NULL;
    CHECK(compacta_signal_new(samples, 1000, 100.0, "ramp", &sig));

    size_t idx[3] = {100, 200, 300};
    CompactaPeaks *peaks = NULL;
    CHECK(compacta_peaks_new(idx, 3, &peaks));

    CompactaFrameSet *fs = NULL;
    CHECK(compacta_time_slice(sig, peaks, 0.8, &fs));
    if (compacta_frameset_count(fs) != 3 || compacta_frameset_frame_length(fs) != 80) return 2;

    double data[4] = {2.0, 2.0, 2.0, 5.0};
    CompactaModel *model = NULL;
    CHECK(compacta_model_fit(data, 4, 0.5, 0.0, COMPACTA_SCALE_STANDARD_ERROR, &model));
    double w = 0.0;
    CHECK(compacta_standardize_mode(model, 5.0, &w));
    if (fabs(w - 4.0) > 1e-12) return 3;

    CompactaFrameSet *bad = NULL;
    if (compacta_fixed_slice(sig, 20.0, 1.0, &bad) != COMPACTA_STATUS_NUMERIC) return 4;

    printf("frames=%zu w=%g version=%s\n", compacta_frameset_count(fs), w, compacta_version());
    compacta_model_free(model);
    compacta_frameset_free(fs);
    compacta_peaks_free(peaks);
    compacta_signal_free(sig);
    return 0;
}
