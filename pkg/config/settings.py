# Configuration settings for the Flashback simulator

# Builder identifiers
PRIMARY_BUILDER = "primary"
SECONDARY_PREFIX = "secondary"

# Simulation defaults
DEFAULT_SIM_CONFIG = {
    'n_users': 100,
    'q': 0.03,
    'k_public': 100,
    'ttl': 10,
    'block_size': 100,
    'bid_count': 3,
    'mean_private_fee': 3.59,
    'mean_public_fee': 1.0,
    'r2': 0.02,
    'epsilon': 0.05,
    'score_weights': (1.0, 0.05, -1.0),
    'window': 3200,
    'feedback_fraction': 0.1,
    'initial_scores': (1.0, 1.0),
    'initial_knowledge_length': 1,
    'n_secondary_builders': 1,
    'proposer_bid_policy': 'greedy',
    'rounds': 10000,
    'seed': 0,
    'bidding_enabled': True,
    'fixed_bid_rate': None,
    'uniform_routing': False,
    'score_floor': 1e-6,
    'estimate_basis': 'bundle',
}

MAX_SEED = 2 ** 64

# Tolerances
CONSERVATION_TOLERANCE = 1e-9
PARAMS_SUM_TOLERANCE = 1e-12
FIXED_POINT_TOLERANCE = 1e-9
FIXED_POINT_GRID_STEP = 1e-4
SIMPLIFIED_TOLERANCE = 1e-10

# Experiment defaults
DEFAULT_SEEDS = tuple(range(1, 11))
WARMUP_ROUNDS = 1000
ROLLING_WINDOW = 500
CONVERGENCE_BAND = 0.02
NULL_CONTROL_CONFIDENCE = 0.99

# Analytic battery defaults
ORACLE_GRID_POINTS = 50
ORACLE_ROUNDS = 1_000_000
ORACLE_SE_LIMIT = 4.0
ANALYTIC_SEED = 20240601

# Output file names
ROUNDS_DIR = "rounds"
SUMMARY_FILE = "summary.json"
SWEEP_FILE = "sweep.csv"
DISTRIBUTIONS_FILE = "distributions.csv"
CONFIG_FILE = "config.txt"
ANALYTIC_REPORT_FILE = "analytic_report.json"
EXCEL_FILE = "summary.xlsx"

# Dataset directory layout
DATASET_TX_FILE = "transactions.csv"
DATASET_BLOCK_FILE = "blocks.csv"
DATASET_LABELS_FILE = "private_labels.txt"

# Excel Configuration
MAX_SHEET_NAME_LENGTH = 31
MAX_COLUMN_WIDTH = 50
MIN_COLUMN_WIDTH = 8

# Colors for Excel formatting
COLORS = {
    'header': "366092",
    'header_text': "FFFFFF",
    'pass': "70AD47",
    'fail': "C5504B",
    'status_text': "FFFFFF",
}

# Console Messages
MESSAGES = {
    'ready': "Ready",
    'running': "Running replications...",
    'sweeping': "Running sweep...",
    'writing': "Writing results...",
    'checking': "Running analytic checks...",
    'done': "Completed successfully!",
    'checks_failed': "Acceptance checks failed",
    'run_failed': "Run failed",
}
