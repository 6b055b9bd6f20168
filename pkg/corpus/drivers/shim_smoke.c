/* Shim fidelity driver: N direct nf_trace calls with generator-derived
 * values, so the reader can regenerate and compare every record.
 */
#include <stdio.h>
#include <stdlib.h>

#include "../shim/nf_trace.h"
#include "lcg.h"

int main(int argc, char **argv)
{
    long n = argc > 1 ? atol(argv[1]) : 100000;
    const char *names[2];
    long long vals[2];
    long k;

    names[0] = "i";
    names[1] = "j";
    nf_srand(2024ULL);
    for (k = 0; k < n; k++) {
        vals[0] = nf_rand(1 << 20);
        vals[1] = nf_rand(97) - 48;
        nf_trace("smoke:entry:0", names, vals, 2);
    }
    if (nf_trace_error()) {
        fprintf(stderr, "trace writes were dropped\n");
        return 1;
    }
    return 0;
}
