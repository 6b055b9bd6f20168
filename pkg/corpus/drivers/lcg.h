/* The seed-shared random stream: 64-bit linear congruential generator,
 * top 31 bits used. Must stay draw-for-draw identical to the Python
 * drivers so traces are byte-comparable across both runners.
 */
#ifndef NF_LCG_H
#define NF_LCG_H

typedef unsigned long long nf_u64;

static nf_u64 nf_lcg_state;

static void nf_srand(nf_u64 seed)
{
    nf_lcg_state = seed;
}

static unsigned int nf_next(void)
{
    nf_lcg_state = nf_lcg_state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (unsigned int)(nf_lcg_state >> 33);
}

static int nf_rand(int n)
{
    return (int)(nf_next() % (unsigned int)n);
}

#endif
