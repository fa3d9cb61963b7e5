#!/usr/bin/env python3
"""Writes tests/fixtures/heads/sample.<ext>: the first 4096 bytes of a file of
each magic-bearing NapierOne type, produced by real encoders where one is
available (Pillow, zipfile, gzip, reportlab, setuptools launchers,
the host ELF binaries) and by hand from the published container layouts
otherwise. Deterministic for a fixed toolchain."""

import gzip
import io
import os
import random
import shutil
import struct
import sys
import zipfile

HEAD = 4096
OUT = os.path.join(os.path.dirname(__file__), "..", "..", "tests", "fixtures", "heads")


def text(n=6000, seed=1):
    rng = random.Random(seed)
    words = "alpha beta gamma delta report quarterly figures summary notes budget".split()
    return " ".join(rng.choice(words) for _ in range(n // 6)).encode()


def image(fmt, **kw):
    from PIL import Image

    img = Image.new("RGB", (64, 64))
    for x in range(64):
        for y in range(64):
            img.putpixel((x, y), (x * 4, y * 4, (x + y) * 2))
    buf = io.BytesIO()
    img.save(buf, fmt, **kw)
    return buf.getvalue()


def zipped(entries):
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as z:
        for name, data in entries:
            info = zipfile.ZipInfo(name, date_time=(2020, 1, 1, 0, 0, 0))
            z.writestr(info, data, zipfile.ZIP_STORED if name == "mimetype" else zipfile.ZIP_DEFLATED)
    return buf.getvalue()


def pdf():
    from reportlab.pdfgen import canvas

    buf = io.BytesIO()
    c = canvas.Canvas(buf, invariant=1)
    c.drawString(72, 720, "Quarterly report")
    c.save()
    return buf.getvalue()


def seven_zip():
    # Signature header: magic, version 0.4, start-header CRC, next-header offset/size/CRC.
    import zlib

    payload = zlib.compress(text(), 9)
    next_header = b"\x01\x04\x06\x00\x01\x09" + bytes(6) + b"\x00"
    start = struct.pack("<QQI", len(payload), len(next_header), zlib.crc32(next_header))
    return b"7z\xbc\xaf\x27\x1c\x00\x04" + struct.pack("<I", zlib.crc32(start)) + start + payload + next_header


def ole2():
    # [MS-CFB] header: signature, CLSID, minor 0x3E, major 3, byte order FFFE, sector shift 9.
    hdr = bytes.fromhex("D0CF11E0A1B11AE1") + bytes(16)
    hdr += struct.pack("<HHHHH", 0x3E, 3, 0xFFFE, 9, 6) + bytes(6)
    hdr += struct.pack("<IIIIIIII", 0, 1, 0, 0, 0x1000, 0xFFFFFFFE, 0, 0xFFFFFFFE) + struct.pack("<I", 0)
    hdr += struct.pack("<I", 0) + struct.pack("<109I", *([0xFFFFFFFF] * 109))
    return hdr.ljust(HEAD, b"\xff")


def launcher():
    import setuptools

    path = os.path.join(os.path.dirname(setuptools.__file__), "cli-64.exe")
    with open(path, "rb") as f:
        return f.read()


def elf():
    with open(shutil.which("true"), "rb") as f:
        return f.read()


def mp3():
    # ID3v2.4 tag with one TIT2 frame, then an MPEG-1 Layer III frame header.
    frame = b"\x03Quarterly"
    tag = b"TIT2" + struct.pack(">I", len(frame)) + b"\x00\x00" + frame
    size = len(tag)
    syncsafe = bytes([(size >> 21) & 0x7F, (size >> 14) & 0x7F, (size >> 7) & 0x7F, size & 0x7F])
    return b"ID3\x04\x00\x00" + syncsafe + tag + b"\xff\xfb\x90\x64" + bytes(413)


def mp4():
    ftyp = b"ftyp" + b"isom" + struct.pack(">I", 512) + b"isomiso2avc1mp41"
    box = struct.pack(">I", 8 + len(ftyp) - 4) + ftyp
    return box + struct.pack(">I", 8) + b"free" + struct.pack(">I", 16) + b"mdat" + bytes(8)


def mkv():
    def element(eid, payload):
        return eid + bytes([0x80 | len(payload)]) + payload

    body = element(b"\x42\x86", b"\x01") + element(b"\x42\xf7", b"\x01") + element(b"\x42\x82", b"matroska")
    return b"\x1a\x45\xdf\xa3" + bytes([0x80 | len(body)]) + body + b"\x18\x53\x80\x67" + bytes(64)


def dwg():
    return b"AC1032" + bytes([0, 0, 0, 0, 0, 0x1F, 0x01]) + bytes(200)


def rar():
    # RAR 5 signature followed by a main archive header block.
    return b"Rar!\x1a\x07\x01\x00" + bytes.fromhex("33921be00501000000") + bytes(64)


def main():
    os.makedirs(OUT, exist_ok=True)
    docx = [("[Content_Types].xml", b"<Types/>"), ("word/document.xml", text(4000))]
    samples = {
        "7z": seven_zip(),
        "apk": zipped([("AndroidManifest.xml", text(3000)), ("classes.dex", b"dex\n035\x00" + bytes(200))]),
        "bmp": image("BMP"),
        "dll": launcher(),
        "doc": ole2(),
        "docx": zipped(docx),
        "dwg": dwg(),
        "elf": elf(),
        "eps": image("EPS"),
        "epub": zipped([("mimetype", b"application/epub+zip"), ("OEBPS/content.opf", text(3000))]),
        "exe": launcher(),
        "gif": image("GIF"),
        "gz": gzip.compress(text(), mtime=0),
        "jpg": image("JPEG", quality=80),
        "mkv": mkv(),
        "mp3": mp3(),
        "mp4": mp4(),
        "ods": zipped([("mimetype", b"application/vnd.oasis.opendocument.spreadsheet"), ("content.xml", text())]),
        "oxps": zipped([("[Content_Types].xml", b"<Types/>"), ("Documents/1/Pages/1.fpage", text())]),
        "pdf": pdf(),
        "png": image("PNG"),
        "ppt": ole2(),
        "pptx": zipped([("[Content_Types].xml", b"<Types/>"), ("ppt/slides/slide1.xml", text())]),
        "rar": rar(),
        "tif": image("TIFF"),
        "webp": image("WEBP", quality=80),
        "xls": ole2(),
        "xlsx": zipped([("[Content_Types].xml", b"<Types/>"), ("xl/worksheets/sheet1.xml", text())]),
        "zip": zipped([("notes.txt", text())]),
    }
    for ext, data in sorted(samples.items()):
        with open(os.path.join(OUT, "sample." + ext), "wb") as f:
            f.write(data[:HEAD])
    print(f"{len(samples)} heads written to {os.path.normpath(OUT)}", file=sys.stderr)


if __name__ == "__main__":
    main()
