/* Boyer-Moore-Horspool substring search, scaled to a 4-symbol alphabet and
 * short patterns (variant), plus a naive reference and an equivalence checker.
 */

#include <assert.h>

#define JS_ASSERT(x) assert(x)
#define BMH_CHARSET_SIZE 4
#define BMH_PATLEN_MAX 3
#define BMH_BAD_PATTERN -2

typedef unsigned short uint16;
typedef uint16 jschar;
typedef unsigned char uint8;
typedef int jsint;

jsint
js_BoyerMooreHorspool(const jschar *text, jsint textlen,
                      const jschar *pat, jsint patlen,
                      jsint start)
{
    jsint i, j, k, m;
    uint8 skip[BMH_CHARSET_SIZE];
    jschar c;

    JS_ASSERT(0 < patlen && patlen <= BMH_PATLEN_MAX);
    for (i = 0; i < BMH_CHARSET_SIZE; i++)
        skip[i] = (uint8)patlen;
    m = patlen - 1;
    for (i = 0; i < m; i++) {
        c = pat[i];
        if (c >= BMH_CHARSET_SIZE)
            return BMH_BAD_PATTERN;
        skip[c] = (uint8)(m - i);
    }
    for (k = start + m;
         k < textlen;
         k += ((c = text[k]) >= BMH_CHARSET_SIZE) ? patlen : skip[c]) {
        for (i = k, j = m; ; i--, j--) {
            if (j <= 0)
                return i + 1;
            if (text[i] != pat[j])
                break;
        }
    }
    return -1;
}

jsint
naive_first(const jschar *text, jsint textlen,
            const jschar *pat, jsint patlen,
            jsint start)
{
    jsint s;
    jsint j;
    jsint ok;
    for (s = start; s <= textlen - patlen; s++) {
        ok = 1;
        for (j = 0; j < patlen; j++) {
            if (text[s + j] != pat[j])
                ok = 0;
        }
        if (ok == 1)
            return s;
    }
    return -1;
}

void
check_bmh(jschar *text, jsint textlen, jschar *pat, jsint patlen, jsint start)
{
    jsint a;
    jsint b;
    a = js_BoyerMooreHorspool(text, textlen, pat, patlen, start);
    b = naive_first(text, textlen, pat, patlen, start);
    assert(a == b);
}
