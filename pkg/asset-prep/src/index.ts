export {
  AssetPrepError,
  DecodeError,
  NoSubjectError,
  UnknownModelError,
} from './errors.js';
export {
  readDepth,
  readEmbedding,
  readImage,
  writeDepth,
  writeEmbedding,
  writeMask,
  writeRgbImage,
} from './formats.js';
export type { DepthGrid, RawImage } from './formats.js';
export {
  DEFAULT_MODELS,
  createModelSuite,
  modelNames,
  registerModel,
  resolveModel,
} from './models.js';
export type {
  CaptionEncoder,
  Captioner,
  DepthModel,
  FaceBox,
  FaceLocator,
  ImageEncoder,
  ModelKind,
  ModelSuite,
  SegmentationModel,
} from './models.js';
export {
  idFromPath,
  prepareBackground,
  prepareBackgrounds,
  prepareForeground,
  prepareForegrounds,
  writeBackgroundManifest,
  writeForegroundManifest,
} from './prepare.js';
export type {
  BackgroundFiles,
  BatchResult,
  ForegroundFiles,
} from './prepare.js';
