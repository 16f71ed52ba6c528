domain_tag = b"ace-v1"
election_id = "ace-election"

# transcript file and proof blobs
transcript_format = 1
proof_format = 1

# tick schedule: phase -> [start, end)
phase_ticks = {
    "setup": (0, 1),
    "voting": (1, 100),
    "tally": (100, 120),
    "result": (120, 140),
    "verification": (140, None),
}

# ticks a voter waits for receipts, board entries or reveals before filing a silence record
audit_timeout = 4

max_choices = {"tiny_test": 8, "production": 256}

soundness_columns = ["k", "trials", "cheat_probability", "undetected", "rate", "expected", "sigma", "p_value"]
complexity_columns = ["n_t", "k", "n_v", "voter_messages", "voter_bound", "tallier_voter_messages", "tallier_sync_messages", "sync_bound"]
forgery_columns = ["trials", "successes", "rate", "corrupted_trapdoor"]
metrics_columns = ["party", "messages"]
