"""Time-series signal name constants and file naming."""

PRICE = "price"
AMBIENT = "ambient"
IRRADIANCE = "irradiance"
OCCUPANCY = "occupancy"
HOT_WATER = "hot_water"
STANDBY = "standby"

ALL_SIGNALS = (PRICE, AMBIENT, IRRADIANCE, OCCUPANCY, HOT_WATER, STANDBY)

UNITS = {
    PRICE: "EUR/kWh",
    AMBIENT: "degC",
    IRRADIANCE: "W/m2",
    OCCUPANCY: "persons",
    HOT_WATER: "litre/period",
    STANDBY: "kW",
}

# standby is neglected unless a file is given
OPTIONAL_SIGNALS = (STANDBY,)


def series_filename(signal):
    """Default file name of a signal inside a scenario directory.

    Args:
        signal: One of the signal name constants.

    Returns:
        "<signal>.csv"
    """
    if signal not in ALL_SIGNALS:
        raise KeyError("unknown signal %r" % (signal,))
    return "%s.csv" % signal
