import { describe, expect, it } from 'vitest';
import { UnknownModelError } from '../src/errors.js';
import type { DepthModel } from '../src/models.js';
import {
  DEFAULT_MODELS,
  createModelSuite,
  modelNames,
  registerModel,
  resolveModel,
} from '../src/models.js';
import { constantImage, makeScene, norm } from './helpers.js';

const suite = createModelSuite();

describe('depth model', () => {
  it('is deterministic', () => {
    const scene = makeScene(1, 32, 24);
    expect(suite.depth.estimate(scene).values).toEqual(suite.depth.estimate(scene).values);
  });

  it('puts the top of the frame farther than the bottom', () => {
    const flat = constantImage(16, 16);
    const depth = suite.depth.estimate(flat);
    expect(depth.values[0]!).toBeGreaterThan(depth.values[15 * 16]!);
  });

  it('treats dark pixels as farther within a row', () => {
    const image = constantImage(2, 1, 40);
    image.data[4] = 220;
    image.data[5] = 220;
    image.data[6] = 220;
    const depth = suite.depth.estimate(image);
    expect(depth.values[0]!).toBeGreaterThan(depth.values[1]!);
  });
});

describe('segmentation model', () => {
  it('finds the subject blob and not the corners', () => {
    const scene = makeScene(2, 48, 36);
    const mask = suite.segmentation.segment(scene);
    const center = Math.floor(36 / 2) * 48 + Math.floor(48 / 2);
    expect(mask.some((v) => v !== 0)).toBe(true);
    expect(mask[center]).toBe(1);
    expect(mask[0]).toBe(0);
    expect(mask[mask.length - 1]).toBe(0);
  });

  it('segments a uniform image to nothing', () => {
    const mask = suite.segmentation.segment(constantImage(20, 20));
    expect(mask.every((v) => v === 0)).toBe(true);
  });
});

describe('encoders', () => {
  it('visual embeddings are unit-norm and deterministic', () => {
    const scene = makeScene(3, 40, 30);
    const a = suite.imageEncoder.encode(scene);
    const b = suite.imageEncoder.encode(scene);
    expect(a.length).toBe(suite.imageEncoder.dim);
    expect(Math.abs(norm(a) - 1)).toBeLessThan(1e-6);
    expect(a).toEqual(b);
  });

  it('different scenes get different visual embeddings', () => {
    const a = suite.imageEncoder.encode(makeScene(4, 40, 30));
    const b = suite.imageEncoder.encode(makeScene(5, 40, 30));
    expect(a).not.toEqual(b);
  });

  it('caption embeddings are unit-norm, even for single characters', () => {
    for (const caption of ['a', 'a bright warm portrait photo', 'xyzzy']) {
      const vec = suite.captionEncoder.encode(caption);
      expect(vec.length).toBe(suite.captionEncoder.dim);
      expect(Math.abs(norm(vec) - 1)).toBeLessThan(1e-6);
    }
  });

  it('distinct captions map to distinct embeddings', () => {
    const a = suite.captionEncoder.encode('a dark cool portrait photo');
    const b = suite.captionEncoder.encode('a bright warm landscape photo');
    expect(a).not.toEqual(b);
  });
});

describe('captioner', () => {
  it('emits a non-empty template caption', () => {
    const caption = suite.captioner.caption(makeScene(6, 48, 36));
    expect(caption).toMatch(/^a (dark|dim|bright) (warm|cool|neutral) (portrait|landscape|square) photo$/);
  });

  it('names the orientation', () => {
    expect(suite.captioner.caption(constantImage(30, 20))).toContain('landscape');
    expect(suite.captioner.caption(constantImage(20, 30))).toContain('portrait');
    expect(suite.captioner.caption(constantImage(20, 20))).toContain('square');
  });
});

describe('face locator', () => {
  it('boxes the top band of the mask', () => {
    const image = constantImage(24, 40);
    const mask = new Uint8Array(24 * 40);
    for (let r = 10; r < 30; r++) {
      for (let c = 4; c < 20; c++) mask[r * 24 + c] = 1;
    }
    const box = suite.faceLocator.locate(image, mask);
    expect(box).toEqual({ x: 10, y: 8, w: 8, h: 6 });
  });

  it('returns null for an empty mask', () => {
    const image = constantImage(8, 8);
    expect(suite.faceLocator.locate(image, new Uint8Array(64))).toBeNull();
  });
});

describe('registry', () => {
  it('resolves defaults by name', () => {
    for (const kind of Object.keys(DEFAULT_MODELS) as (keyof typeof DEFAULT_MODELS)[]) {
      expect(resolveModel(kind, DEFAULT_MODELS[kind]).name).toBe(DEFAULT_MODELS[kind]);
      expect(modelNames(kind)).toContain(DEFAULT_MODELS[kind]);
    }
  });

  it('rejects unknown names with the known list', () => {
    expect(() => resolveModel('depth', 'nope')).toThrow(UnknownModelError);
    expect(() => resolveModel('depth', 'nope')).toThrow(/luminance-depth/);
  });

  it('accepts registered replacements', () => {
    const flat: DepthModel = {
      name: 'flat-depth',
      estimate: (image) => ({
        width: image.width,
        height: image.height,
        values: new Float32Array(image.width * image.height).fill(1),
      }),
    };
    registerModel('depth', flat);
    const custom = createModelSuite({ depth: 'flat-depth' });
    expect(custom.depth.estimate(constantImage(2, 2)).values).toEqual(
      new Float32Array([1, 1, 1, 1]),
    );
    expect(custom.segmentation.name).toBe(DEFAULT_MODELS.segmentation);
  });
});
