import enum


class Phase(enum.Enum):
    """
    Phase label of a point (k, H_ext) of the diagram
    """
    PURE = 'Pure'                   # field expelled, u has modulus one
    NORMAL = 'Normal'               # u vanishes, field fully penetrates
    MIXED = 'Mixed'                 # vortex lattice
    UNDETERMINED = 'Undetermined'   # between the proven bounds of the lower critical field


class SectionSource(enum.IntFlag):
    """
    How a SectionField was produced; decides whether its derivatives are exact
    """
    THETA_SERIES = 1    # the lowest Landau level u0
    TRANSLATED = 2      # a magnetic translate u_h
    BOGOMOLNY = 4       # u0 * exp(f) with f periodic
    COMBINED = 8        # linear combination of the above

    ANALYTIC = THETA_SERIES | TRANSLATED


class OutputFormat(enum.Enum):
    CSV = 'csv'
    JSON = 'json'
