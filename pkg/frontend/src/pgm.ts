// Binary PGM (P5) decoding for canvas display. The service ships images as
// base64-encoded PGM; this turns them into 8-bit grayscale samples without
// losing the pixel grid (no resampling happens here).

export interface PgmImage {
  width: number;
  height: number;
  maxval: number;
  /** Row-major samples scaled to 0..255 regardless of source maxval. */
  pixels: Uint8ClampedArray;
}

export function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
  return out;
}

const WHITESPACE = new Set([0x20, 0x09, 0x0a, 0x0d, 0x0b, 0x0c]);

/** Reads the three header integers, skipping whitespace and # comments. */
function readHeaderInts(bytes: Uint8Array, start: number, count: number): { values: number[]; next: number } {
  const values: number[] = [];
  let i = start;
  while (values.length < count) {
    while (i < bytes.length && WHITESPACE.has(bytes[i])) i++;
    if (i < bytes.length && bytes[i] === 0x23) {
      // comment runs to end of line
      while (i < bytes.length && bytes[i] !== 0x0a) i++;
      continue;
    }
    let token = "";
    while (i < bytes.length && !WHITESPACE.has(bytes[i]) && bytes[i] !== 0x23) {
      token += String.fromCharCode(bytes[i]);
      i++;
    }
    if (token === "") throw new Error("truncated PGM header");
    const value = Number(token);
    if (!Number.isInteger(value)) throw new Error(`bad PGM header token: ${token}`);
    values.push(value);
  }
  return { values, next: i };
}

export function decodePgm(bytes: Uint8Array): PgmImage {
  if (bytes.length < 2 || bytes[0] !== 0x50 || bytes[1] !== 0x35) {
    throw new Error("not a binary PGM (missing P5 magic)");
  }
  const header = readHeaderInts(bytes, 2, 3);
  const [width, height, maxval] = header.values;
  if (width <= 0 || height <= 0) throw new Error(`bad PGM size ${width}x${height}`);
  if (maxval <= 0 || maxval >= 65536) throw new Error(`bad PGM maxval ${maxval}`);

  // exactly one whitespace byte separates the header from the raster
  let offset = header.next;
  if (offset >= bytes.length || !WHITESPACE.has(bytes[offset])) {
    throw new Error("missing separator after PGM header");
  }
  offset++;

  const twoByte = maxval > 255;
  const expected = width * height * (twoByte ? 2 : 1);
  if (bytes.length - offset < expected) {
    throw new Error(`truncated PGM raster: expected ${expected} bytes, got ${bytes.length - offset}`);
  }

  const pixels = new Uint8ClampedArray(width * height);
  if (twoByte) {
    for (let p = 0; p < width * height; p++) {
      const v = (bytes[offset + 2 * p] << 8) | bytes[offset + 2 * p + 1];
      pixels[p] = Math.round((v * 255) / maxval);
    }
  } else if (maxval === 255) {
    pixels.set(bytes.subarray(offset, offset + expected));
  } else {
    for (let p = 0; p < width * height; p++) {
      pixels[p] = Math.round((bytes[offset + p] * 255) / maxval);
    }
  }
  return { width, height, maxval, pixels };
}

/** Expands grayscale samples to RGBA for putImageData. */
export function toRgba(img: PgmImage): Uint8ClampedArray<ArrayBuffer> {
  const rgba = new Uint8ClampedArray(img.width * img.height * 4);
  for (let p = 0; p < img.pixels.length; p++) {
    const v = img.pixels[p];
    rgba[4 * p] = v;
    rgba[4 * p + 1] = v;
    rgba[4 * p + 2] = v;
    rgba[4 * p + 3] = 255;
  }
  return rgba;
}
