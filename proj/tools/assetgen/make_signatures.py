#!/usr/bin/env python3
"""Regenerates assets/signatures.json from the table below."""
import json
import pathlib

ZIP = ["504B0304", "504B0506", "504B0708"]
OLE = ["D0CF11E0A1B11AE1"]
MZ = ["4D5A"]

# extension -> list of (offset, hex) or None for plain text
TABLE = {
    "7z": [(0, "377ABCAF271C")],
    "apk": [(0, h) for h in ZIP],
    "bin": [],
    "bmp": [(0, "424D")],
    "css": None,
    "csv": None,
    "dll": [(0, h) for h in MZ],
    "doc": [(0, h) for h in OLE],
    "docx": [(0, h) for h in ZIP],
    "dwg": [(0, "41433130")],
    "elf": [(0, "7F454C46")],
    "eps": [(0, "C5D0D3C6"), (0, "252150532D41646F62652D332E3020455053")],
    "epub": [(0, h) for h in ZIP],
    "exe": [(0, h) for h in MZ],
    "gif": [(0, "474946383761"), (0, "474946383961")],
    "gz": [(0, "1F8B")],
    "gzip": [(0, "1F8B")],
    "html": None,
    "htm": None,
    "ics": None,
    "js": None,
    "jpg": [(0, "FFD8FF")],
    "jpeg": [(0, "FFD8FF")],
    "json": None,
    "mkv": [(0, "1A45DFA3")],
    "mp3": [(0, "494433"), (0, "FFFB"), (0, "FFF3"), (0, "FFF2")],
    "mp4": [(4, "66747970")],
    "ods": [(0, h) for h in ZIP],
    "oxps": [(0, h) for h in ZIP],
    "pdf": [(0, "25504446")],
    "png": [(0, "89504E470D0A1A0A")],
    "ps": None,
    "ppt": [(0, h) for h in OLE],
    "pptx": [(0, h) for h in ZIP],
    "rand": [],
    "svg": None,
    "rar": [(0, "526172211A0700"), (0, "526172211A070100")],
    "tif": [(0, "49492A00"), (0, "4D4D002A")],
    "tiff": [(0, "49492A00"), (0, "4D4D002A")],
    "txt": None,
    "webp": [(8, "57454250")],
    "xls": [(0, h) for h in OLE],
    "xlsx": [(0, h) for h in ZIP],
    "xml": None,
    "zip": [(0, h) for h in ZIP],
    # beyond the NapierOne type list
    "jar": [(0, h) for h in ZIP],
    "odt": [(0, h) for h in ZIP],
    "odp": [(0, h) for h in ZIP],
    "xps": [(0, h) for h in ZIP],
    "msi": [(0, h) for h in OLE],
    "msg": [(0, h) for h in OLE],
    "wav": [(8, "57415645")],
    "avi": [(8, "41564920")],
    "aiff": [(8, "41494646")],
    "flac": [(0, "664C6143")],
    "ogg": [(0, "4F676753")],
    "mid": [(0, "4D546864")],
    "mov": [(4, "6674797071742020"), (4, "6D6F6F76")],
    "m4a": [(4, "667479704D344120")],
    "3gp": [(4, "6674797033677035"), (4, "6674797033677034")],
    "heic": [(4, "6674797068656963")],
    "avif": [(4, "6674797061766966")],
    "webm": [(0, "1A45DFA3")],
    "ico": [(0, "00000100")],
    "cur": [(0, "00000200")],
    "psd": [(0, "38425053")],
    "tar": [(257, "7573746172")],
    "xz": [(0, "FD377A585A00")],
    "bz2": [(0, "425A68")],
    "zst": [(0, "28B52FFD")],
    "lz4": [(0, "04224D18")],
    "cab": [(0, "4D534346")],
    "class": [(0, "CAFEBABE")],
    "sqlite": [(0, "53514C69746520666F726D6174203300")],
    "woff": [(0, "774F4646")],
    "woff2": [(0, "774F4632")],
    "ttf": [(0, "0001000000")],
    "otf": [(0, "4F54544F")],
    "swf": [(0, "435753"), (0, "465753"), (0, "5A5753")],
    "flv": [(0, "464C56")],
    "rtf": [(0, "7B5C72746631")],
    "wasm": [(0, "0061736D")],
    "dex": [(0, "6465780A")],
    "lnk": [(0, "4C0000000114020000000000C000000000000046")],
    "pcap": [(0, "D4C3B2A1"), (0, "A1B2C3D4")],
    "pcapng": [(0, "0A0D0D0A")],
    "jp2": [(0, "0000000C6A5020200D0A870A")],
    "djvu": [(0, "41542654464F524D")],
    "chm": [(0, "49545346")],
    "vmdk": [(0, "4B444D")],
    "vhd": [(0, "636F6E6563746978")],
    "qcow2": [(0, "514649FB")],
    "deb": [(0, "213C617263683E0A")],
    "rpm": [(0, "EDABEEDB")],
    "mobi": [(60, "424F4F4B4D4F4249")],
    "xcf": [(0, "67696D7020786366")],
    "blend": [(0, "424C454E444552")],
    "kdbx": [(0, "03D9A29A67FB4BB5")],
    "pst": [(0, "2142444E")],
    "evtx": [(0, "456C6646696C6500")],
    "torrent": [(0, "64383A616E6E6F756E6365")],
    "mpg": [(0, "000001BA"), (0, "000001B3")],
    "wmv": [(0, "3026B2758E66CF11A6D900AA0062CE6C")],
    "amr": [(0, "2123414D52")],
    "exr": [(0, "762F3101")],
    "dcm": [(128, "4449434D")],
    "fits": [(0, "53494D504C4520203D")],
    "md": None,
    "log": None,
    "ini": None,
    "cfg": None,
    "yaml": None,
    "yml": None,
    "tsv": None,
    "sql": None,
    "bat": None,
    "ps1": None,
    "sh": None,
    "py": None,
    "c": None,
    "h": None,
    "cpp": None,
    "java": None,
    "php": None,
}

entries = []
for ext, pats in TABLE.items():
    entries.append({
        "extension": ext,
        "patterns": [] if pats is None else [{"offset": o, "hex": h} for o, h in pats],
        "plain_text": pats is None,
    })

out = pathlib.Path(__file__).resolve().parents[2] / "assets" / "signatures.json"
out.write_text(json.dumps(entries, indent=1) + "\n")
print(len(entries), "entries")
