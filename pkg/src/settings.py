# src/settings.py – numeric defaults shared by the library and the CLI

# ── Ensemble validation ────────────────────────────────────────────────────
FRACTION_SUM_TOL = 1e-6        # fractions carry 6 decimals; sums are checked on exact decimal values

# ── Component-code guards ──────────────────────────────────────────────────
MAX_CODE_LENGTH = 24
MAX_ENUM_DIMENSION = 24

# ── Exact polynomial powers ────────────────────────────────────────────────
MAX_POWER_DEGREE = 50_000      # ℓ·deg bound per variable
SQUARING_WORK_BUDGET = 4_000_000   # coefficient products before "auto" switches to the recurrence

# ── Saddle-point solver ────────────────────────────────────────────────────
RESIDUAL_TARGET = 1e-12
RESIDUAL_ACCEPT = 1e-10
NEWTON_MAX_STEPS = 200
NEWTON_MAX_HALVINGS = 60
NESTED_BETA_PROBES = 48        # logit-spaced β probes for the cold start
ROOT_XTOL = 1e-14              # brentq tolerance in log coordinates
LOG_SEARCH_SPAN = 60.0         # |log x|, |log z| search window for 1-D brackets
LOG_X_SCAN_POINTS = 241        # log-x grid scanned for every root of the y-equation

# ── Sweeps ─────────────────────────────────────────────────────────────────
SWEEP_POINTS = 100
SWEEP_ALPHA_MIN = 1e-5
SWEEP_ALPHA_MAX_FRACTION = 0.99

# ── α* scan ────────────────────────────────────────────────────────────────
ALPHA_STAR_START = 1e-6
ALPHA_STAR_RATIO = 1.25
ALPHA_STAR_TOL = 1e-10

# ── Oracles ────────────────────────────────────────────────────────────────
MAX_EXACT_EDGES = 2000
BRUTE_MAX_EDGES = 9
BRUTE_MAX_INPUT_BITS = 20
BRUTE_PERMUTATION_CHUNK = 4096
MAX_S_VN_TYPES = 3
MAX_S_GRID = 21
MAX_S_REFINEMENTS = 3

# ── Published reference values (reproduction report) ───────────────────────
PUBLISHED_RATE = 0.5
PUBLISHED_CV_ENSEMBLE_1 = 1.19
PUBLISHED_CV_ENSEMBLE_2 = 0.5
PUBLISHED_ALPHA_STAR_ENSEMBLE_2 = 2.625e-3
PUBLISHED_ALPHA_STAR_MATCH_TOL = 5e-4
PUBLISHED_SWEEP_SECONDS = (5.1, 6.7)
