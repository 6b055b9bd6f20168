/* Random tester for the substring-search fixtures: random text/pattern
 * pairs through the equivalence checker.
 */
#include <stdlib.h>

typedef unsigned short jschar_arg;

extern int check_bmh(jschar_arg *text, int textlen, jschar_arg *pat, int patlen, int start);

#include "lcg.h"

int main(int argc, char **argv)
{
    int seed = argc > 1 ? atoi(argv[1]) : 7;
    int num_tests = argc > 2 ? atoi(argv[2]) : 2000;
    jschar_arg text[8];
    jschar_arg pat[4];
    int t, i;

    nf_srand((nf_u64)seed);
    for (t = 0; t < num_tests; t++) {
        int tl = nf_rand(7);
        int pl = 1 + nf_rand(3);
        for (i = 0; i < tl; i++)
            text[i] = (jschar_arg)nf_rand(4);
        for (i = 0; i < pl; i++)
            pat[i] = (jschar_arg)nf_rand(4);
        int start = nf_rand(3);
        check_bmh(text, tl, pat, pl, start);
    }
    return 0;
}
