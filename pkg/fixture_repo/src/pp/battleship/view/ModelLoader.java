package pp.battleship.view;

import java.util.HashMap;
import java.util.Map;

/**
 * Maps ship lengths to 3d model asset paths; lengths without a model fall
 * back to the box representation.
 */
public class ModelLoader {
    private final Map<Integer, String> modelsByLength = new HashMap<>();

    public ModelLoader() {
        modelsByLength.put(4, "Models/ship_large/ship_large.j3o");
    }

    public String assetForLength(int length) {
        return modelsByLength.get(length);
    }

    public void registerModel(int length, String assetPath) {
        if (assetPath == null || assetPath.isEmpty()) {
            throw new IllegalArgumentException("assetPath must not be empty");
        }
        modelsByLength.put(length, assetPath);
    }

    public String describe() {
        StringBuilder sb = new StringBuilder("{");
        for (Map.Entry<Integer, String> entry : modelsByLength.entrySet()) {
            sb.append(entry.getKey()).append("=").append(entry.getValue()).append(";");
        }
        return sb.append("}").toString();
    }
}
