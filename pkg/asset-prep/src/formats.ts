/**
 * Binary serialization for the compositing engine's file contract.
 *
 * DMAP: "DMAP" magic, u8 version, u32 width, u32 height (little-endian),
 * then width*height float32 values in row-major order.
 *
 * EMB1: "EMB1" magic, u8 version, u32 dim, then dim float32 values.
 *
 * Both readers exist so tests can round-trip without the engine; the
 * engine's own loaders stay the source of truth for conformance.
 */

import { readFileSync, writeFileSync } from 'node:fs';
import { PNG } from 'pngjs';
import { DecodeError } from './errors.js';

const FORMAT_VERSION = 1;
const DMAP_MAGIC = 'DMAP';
const EMB1_MAGIC = 'EMB1';
const DMAP_HEADER_SIZE = 13;
const EMB1_HEADER_SIZE = 9;

export interface DepthGrid {
  width: number;
  height: number;
  /** Row-major, length width * height. */
  values: Float32Array;
}

export interface RawImage {
  width: number;
  height: number;
  /** RGBA, 4 bytes per pixel, row-major. */
  data: Buffer;
}

function assertFinite(values: Float32Array, what: string): void {
  for (let i = 0; i < values.length; i++) {
    if (!Number.isFinite(values[i])) {
      throw new DecodeError(`${what} contains a non-finite value at index ${i}`);
    }
  }
}

export function writeDepth(grid: DepthGrid, path: string): void {
  const { width, height, values } = grid;
  if (width <= 0 || height <= 0 || values.length !== width * height) {
    throw new DecodeError(
      `depth grid ${width}x${height} does not match ${values.length} values`,
    );
  }
  assertFinite(values, 'depth grid');
  const buf = Buffer.alloc(DMAP_HEADER_SIZE + 4 * values.length);
  buf.write(DMAP_MAGIC, 0, 'ascii');
  buf.writeUInt8(FORMAT_VERSION, 4);
  buf.writeUInt32LE(width, 5);
  buf.writeUInt32LE(height, 9);
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(values[i]!, DMAP_HEADER_SIZE + 4 * i);
  }
  writeFileSync(path, buf);
}

export function readDepth(path: string): DepthGrid {
  const buf = readFileSync(path);
  if (buf.length < DMAP_HEADER_SIZE || buf.toString('ascii', 0, 4) !== DMAP_MAGIC) {
    throw new DecodeError(`${path}: not a DMAP file`);
  }
  if (buf.readUInt8(4) !== FORMAT_VERSION) {
    throw new DecodeError(`${path}: unsupported DMAP version ${buf.readUInt8(4)}`);
  }
  const width = buf.readUInt32LE(5);
  const height = buf.readUInt32LE(9);
  const expected = DMAP_HEADER_SIZE + 4 * width * height;
  if (buf.length !== expected) {
    throw new DecodeError(`${path}: expected ${expected} bytes, found ${buf.length}`);
  }
  const values = new Float32Array(width * height);
  for (let i = 0; i < values.length; i++) {
    values[i] = buf.readFloatLE(DMAP_HEADER_SIZE + 4 * i);
  }
  return { width, height, values };
}

export function writeEmbedding(vector: Float32Array, path: string): void {
  if (vector.length === 0) {
    throw new DecodeError('embedding must have at least one dimension');
  }
  assertFinite(vector, 'embedding');
  const buf = Buffer.alloc(EMB1_HEADER_SIZE + 4 * vector.length);
  buf.write(EMB1_MAGIC, 0, 'ascii');
  buf.writeUInt8(FORMAT_VERSION, 4);
  buf.writeUInt32LE(vector.length, 5);
  for (let i = 0; i < vector.length; i++) {
    buf.writeFloatLE(vector[i]!, EMB1_HEADER_SIZE + 4 * i);
  }
  writeFileSync(path, buf);
}

export function readEmbedding(path: string): Float32Array {
  const buf = readFileSync(path);
  if (buf.length < EMB1_HEADER_SIZE || buf.toString('ascii', 0, 4) !== EMB1_MAGIC) {
    throw new DecodeError(`${path}: not an EMB1 file`);
  }
  if (buf.readUInt8(4) !== FORMAT_VERSION) {
    throw new DecodeError(`${path}: unsupported EMB1 version ${buf.readUInt8(4)}`);
  }
  const dim = buf.readUInt32LE(5);
  const expected = EMB1_HEADER_SIZE + 4 * dim;
  if (buf.length !== expected) {
    throw new DecodeError(`${path}: expected ${expected} bytes, found ${buf.length}`);
  }
  const vector = new Float32Array(dim);
  for (let i = 0; i < dim; i++) {
    vector[i] = buf.readFloatLE(EMB1_HEADER_SIZE + 4 * i);
  }
  return vector;
}

export function readImage(path: string): RawImage {
  let png: PNG;
  try {
    png = PNG.sync.read(readFileSync(path));
  } catch (err) {
    throw new DecodeError(`${path}: ${err instanceof Error ? err.message : err}`);
  }
  return { width: png.width, height: png.height, data: png.data };
}

export function writeRgbImage(image: RawImage, path: string): void {
  const png = new PNG({ width: image.width, height: image.height });
  image.data.copy(png.data);
  writeFileSync(path, PNG.sync.write(png, { colorType: 2 }));
}

/**
 * Write a binary mask as an 8-bit grayscale PNG with values in {0, 255}.
 * The engine's loader rejects anything between.
 */
export function writeMask(
  mask: Uint8Array,
  width: number,
  height: number,
  path: string,
): void {
  if (mask.length !== width * height) {
    throw new DecodeError(
      `mask ${width}x${height} does not match ${mask.length} values`,
    );
  }
  const png = new PNG({ width, height });
  for (let i = 0; i < mask.length; i++) {
    const v = mask[i] ? 255 : 0;
    png.data[4 * i] = v;
    png.data[4 * i + 1] = v;
    png.data[4 * i + 2] = v;
    png.data[4 * i + 3] = 255;
  }
  writeFileSync(path, PNG.sync.write(png, { colorType: 0 }));
}
