# AUTO-GENERATED FILE - DO NOT EDIT
# Source: registry/solver.json

class SolverErrors:
    BUDGET_EXCEEDED = "solver.budget_exceeded"
    EMPTY_H_LIST = "solver.empty_h_list"
    GRID_TOO_COARSE = "solver.grid_too_coarse"
    INCOMPLETE_SPECTRUM = "solver.incomplete_spectrum"
    INVALID_PROBLEM = "solver.invalid_problem"
    M_RANGE_TOO_SMALL = "solver.m_range_too_small"
