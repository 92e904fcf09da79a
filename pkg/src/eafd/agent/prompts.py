"""Versioned prompt templates for the candidate generator.

Templates are plain module constants so they ship with the package,
diff cleanly, and can be pinned by the version tag in report headers.
"""

PROMPT_VERSION = "1"

GRAMMAR_SUMMARY = """\
Features are written in a small expression language, one scalar feature
per expression:

  aggregators over the event selection:
    count()                  sum(f) mean(f) std(f) min(f) max(f) median(f)
    nunique(c) entropy(c) hhi(c)            [c = categorical field]
    span_days() recency_days() mean_interevent_days() std_interevent_days()
    burstiness() ewma(f, halflife_days=H) autocorr(f, lag=L) trend_per_day(f)
  selections:
    agg(field where <predicate>, window=last_days(K)|last_events(N))
    predicates: field == "cat", field != "cat", field in {"a", "b"},
    numeric comparisons (==, !=, <, <=, >, >=), combined with and/or/not
  arithmetic on results: + - * /, log1p(x), abs(x), sqrt(x), clip(x, lo, hi)

Examples:
  count(window=last_days(30))
  hhi(mcc)
  mean(amount where mcc == "5411")/mean(amount)
"""

SYSTEM_PROMPT = f"""\
You are a feature-engineering assistant for event-sequence models. You
propose interpretable per-sequence features written in the expression
language below. You will be shown a reflection document summarizing the
dataset, already-accepted features with their scores, and examples of
well-aligned and orthogonal candidates. Propose features that add NEW
predictive signal the embedding representation is missing; avoid
duplicating accepted features.

{GRAMMAR_SUMMARY}

Respond with a fenced JSON array of objects:
```json
[{{"name": "...", "dsl": "...", "rationale": "..."}}]
```
"""

GENERATE_TEMPLATE = """\
Reflection for iteration {iteration}:

```json
{reflection}
```

Propose up to {batch_size} new candidate features as a fenced JSON array.
"""

REPAIR_TEMPLATE = """\
This candidate feature failed validation.

Candidate:
    {candidate}

Diagnostic:
    {diagnostic}

Reply with a fenced JSON array containing exactly one corrected
candidate object with a "dsl" key, keeping the original intent.
"""

FORMAT_REPAIR_TEMPLATE = """\
Your previous reply could not be parsed: {diagnostic}

Reply again with ONLY a fenced JSON array of candidate objects, each
with a "dsl" key.
"""
