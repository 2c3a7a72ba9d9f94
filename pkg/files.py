import json


def read_file(file):
    """Return the text of a study output (CSV table, SVG drawing, matrix dump)."""
    with open(file, "r") as fid:
        return fid.read()


def write_file(file, content):
    """Write a rendered table, drawing or mesh listing to `file`."""
    with open(file, "w") as fid:
        fid.write(content)


def read_json(file):
    """Load a study configuration file (a JSON object of StudyConfig fields)."""
    with open(file, "r") as fid:
        return json.load(fid)
